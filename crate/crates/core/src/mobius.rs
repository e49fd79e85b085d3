//! Segmented Möbius sieve, Mertens sums and the correlation / Cesàro
//! statistics used for disjointness and zero-density experiments.
//!
//! Correlations are one-sided (`n = 1..N`), Cesàro averages two-sided
//! (`n = −N..N`).

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::nilseq::SequenceStream;
use crate::sum::{prefix_sums, SumMethod};

pub const DEFAULT_SEGMENT: usize = 1 << 20;
pub const DEFAULT_CAP: u64 = 1_000_000_000;
pub const CACHE_ENV: &str = "NILSEQ_CACHE_DIR";
const MAGIC: &[u8; 4] = b"MOB1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SieveOptions {
    /// Segment length; rounded up to a multiple of 4 so segments pack into
    /// whole bytes.
    pub segment: usize,
    pub cap: u64,
}

impl Default for SieveOptions {
    fn default() -> Self {
        SieveOptions {
            segment: DEFAULT_SEGMENT,
            cap: DEFAULT_CAP,
        }
    }
}

/// `μ(1..=N)` packed four to a byte: `0 → 00`, `1 → 01`, `−1 → 10`,
/// `n` at bits `2(n−1) mod 8` of byte `(n−1)/4`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MobiusTable {
    limit: u64,
    packed: Vec<u8>,
}

fn encode(mu: i8) -> u8 {
    match mu {
        1 => 0b01,
        -1 => 0b10,
        _ => 0b00,
    }
}

fn small_primes(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    primes
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// `μ(n)` for `n ∈ [lo, hi)`, given all primes up to `sqrt(hi − 1)`.
fn sieve_segment(lo: u64, hi: u64, primes: &[u64]) -> Vec<i8> {
    let len = (hi - lo) as usize;
    let mut mu = vec![1i8; len];
    let mut prod = vec![1u64; len];
    for &p in primes {
        if p >= hi {
            break;
        }
        let start = lo.div_ceil(p) * p;
        let mut m = start;
        while m < hi {
            let i = (m - lo) as usize;
            mu[i] = -mu[i];
            prod[i] *= p;
            m += p;
        }
        let p2 = p * p;
        let mut m = lo.div_ceil(p2) * p2;
        while m < hi {
            mu[(m - lo) as usize] = 0;
            m += p2;
        }
    }
    for i in 0..len {
        let n = lo + i as u64;
        if mu[i] != 0 && prod[i] < n {
            // one remaining prime factor above sqrt(hi)
            mu[i] = -mu[i];
        }
    }
    mu
}

fn pack(values: &[i8]) -> Vec<u8> {
    values
        .chunks(4)
        .map(|c| c.iter().enumerate().fold(0u8, |b, (k, &v)| b | (encode(v) << (2 * k))))
        .collect()
}

/// Sieves `μ(1..=N)` with the default segment length and cap.
pub fn sieve_mobius(n: u64) -> Result<MobiusTable> {
    sieve_mobius_with(n, SieveOptions::default())
}

/// Segmented sieve; segments are independent and run in parallel, so the
/// table is the same for any thread count.
pub fn sieve_mobius_with(n: u64, opts: SieveOptions) -> Result<MobiusTable> {
    if n == 0 {
        return Err(Error::Invalid("sieve limit must be at least 1".into()));
    }
    if n > opts.cap {
        return Err(Error::LimitTooLarge {
            requested: n,
            cap: opts.cap,
        });
    }
    let seg = (opts.segment.max(4).div_ceil(4) * 4) as u64;
    let primes = small_primes(isqrt(n));
    let starts: Vec<u64> = (0..n.div_ceil(seg)).map(|i| 1 + i * seg).collect();
    let chunks: Vec<Vec<u8>> = starts
        .par_iter()
        .map(|&lo| {
            let hi = (lo + seg).min(n + 1);
            pack(&sieve_segment(lo, hi, &primes))
        })
        .collect();
    Ok(MobiusTable {
        limit: n,
        packed: chunks.concat(),
    })
}

impl MobiusTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// `μ(n)` for `1 ≤ n ≤ limit`.
    pub fn get(&self, n: u64) -> i8 {
        assert!(n >= 1 && n <= self.limit, "n = {n} outside 1..={}", self.limit);
        let i = (n - 1) as usize;
        match (self.packed[i / 4] >> (2 * (i % 4))) & 0b11 {
            0b01 => 1,
            0b10 => -1,
            _ => 0,
        }
    }

    pub fn values(&self) -> impl Iterator<Item = i8> + '_ {
        (1..=self.limit).map(|n| self.get(n))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + self.packed.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&self.limit.to_le_bytes());
        out.extend_from_slice(&self.packed);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 12 || &bytes[..4] != MAGIC {
            return Err(Error::Parse("not a MOB1 cache file".into()));
        }
        let limit = u64::from_le_bytes(bytes[4..12].try_into().expect("8 bytes"));
        let expected = limit.div_ceil(4) as usize;
        if bytes.len() - 12 != expected {
            return Err(Error::Parse(format!(
                "MOB1 cache for N = {limit} has {} data bytes, expected {expected}",
                bytes.len() - 12
            )));
        }
        Ok(MobiusTable {
            limit,
            packed: bytes[12..].to_vec(),
        })
    }

    pub fn write_cache(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&self.to_bytes())?;
        }
        fs::rename(tmp, path)?;
        Ok(())
    }

    pub fn read_cache(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        MobiusTable::from_bytes(&bytes)
    }
}

/// Cache directory from `NILSEQ_CACHE_DIR`, if set.
pub fn cache_dir_from_env() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

/// Reads `mobius_<N>.bin` from the cache directory, or sieves and writes it.
pub fn load_or_sieve(n: u64, cache_dir: Option<&Path>, opts: SieveOptions) -> Result<MobiusTable> {
    let Some(dir) = cache_dir else {
        return sieve_mobius_with(n, opts);
    };
    let path = dir.join(format!("mobius_{n}.bin"));
    if let Ok(t) = MobiusTable::read_cache(&path) {
        if t.limit == n {
            return Ok(t);
        }
    }
    let t = sieve_mobius_with(n, opts)?;
    fs::create_dir_all(dir)?;
    t.write_cache(&path)?;
    Ok(t)
}

/// Powers of ten up to `limit`, plus `limit` itself.
pub fn default_checkpoints(limit: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 1u64;
    while p <= limit {
        out.push(p);
        match p.checked_mul(10) {
            Some(q) => p = q,
            None => break,
        }
    }
    if out.last() != Some(&limit) && limit > 0 {
        out.push(limit);
    }
    out
}

fn check_checkpoints(checkpoints: &[u64], limit: u64) -> Result<u64> {
    let max = checkpoints.iter().copied().max().unwrap_or(0);
    if max > limit {
        return Err(Error::Invalid(format!("checkpoint {max} exceeds table limit {limit}")));
    }
    if checkpoints.contains(&0) {
        return Err(Error::Invalid("checkpoints must be positive".into()));
    }
    Ok(max)
}

/// `M(K) = Σ_{n≤K} μ(n)` at each checkpoint.
pub fn mertens(table: &MobiusTable, checkpoints: &[u64]) -> Result<Vec<i64>> {
    check_checkpoints(checkpoints, table.limit)?;
    let mut order: Vec<usize> = (0..checkpoints.len()).collect();
    order.sort_by_key(|&i| checkpoints[i]);
    let mut out = vec![0i64; checkpoints.len()];
    let (mut n, mut acc) = (0u64, 0i64);
    for i in order {
        while n < checkpoints[i] {
            n += 1;
            acc += table.get(n) as i64;
        }
        out[i] = acc;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationRow {
    #[serde(rename = "N")]
    pub n: u64,
    pub re_s: f64,
    pub im_s: f64,
    pub abs_s: f64,
}

/// `S(N) = (1/N) Σ_{n=1..N} μ(n) ξ(n)` at each checkpoint.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub rows: Vec<CorrelationRow>,
    pub method: SumMethod,
}

impl CorrelationReport {
    pub fn value(&self, i: usize) -> Complex64 {
        Complex64::new(self.rows[i].re_s, self.rows[i].im_s)
    }

    /// `N,re_S,im_S,abs_S` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "N,re_S,im_S,abs_S")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{}", r.n, r.re_s, r.im_s, r.abs_s)?;
        }
        Ok(())
    }
}

/// Möbius correlation of a bounded sequence, reduced with the fixed tree so
/// serial and parallel runs agree bit for bit.
pub fn correlate(
    table: &MobiusTable,
    xi: &SequenceStream,
    checkpoints: &[u64],
    method: SumMethod,
) -> Result<CorrelationReport> {
    if xi.bound().is_none() {
        return Err(Error::UnboundedSequence);
    }
    let max = check_checkpoints(checkpoints, table.limit)?;
    let zero = Complex64::new(0.0, 0.0);
    let terms: Vec<Complex64> = (1..=max)
        .into_par_iter()
        .map(|n| match table.get(n) {
            0 => zero,
            1 => xi.at(n as i64),
            _ => -xi.at(n as i64),
        })
        .collect();
    let cps: Vec<usize> = checkpoints.iter().map(|&c| c as usize).collect();
    let sums = prefix_sums(&terms, &cps, method);
    let rows = checkpoints
        .iter()
        .zip(sums)
        .map(|(&n, s)| {
            let v = s / n as f64;
            CorrelationRow {
                n,
                re_s: v.re,
                im_s: v.im,
                abs_s: v.norm(),
            }
        })
        .collect();
    Ok(CorrelationReport { rows, method })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CesaroRow {
    #[serde(rename = "N")]
    pub n: u64,
    /// `(1/(2N+1)) Σ_{|n|≤N} |a_n|`
    pub abs_avg: f64,
    /// `(1/(2N+1)) Σ_{|n|≤N} |a_n|²`
    pub sq_avg: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CesaroReport {
    pub rows: Vec<CesaroRow>,
    /// Square root of the `|a|²` average at the largest checkpoint.
    pub quadratic_norm: f64,
}

impl CesaroReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "N,abs_avg,sq_avg")?;
        for r in &self.rows {
            writeln!(w, "{},{},{}", r.n, r.abs_avg, r.sq_avg)?;
        }
        Ok(())
    }
}

/// Two-sided Cesàro averages of `|a_n|` and `|a_n|²`.
pub fn cesaro_stats(a: &SequenceStream, checkpoints: &[u64], method: SumMethod) -> CesaroReport {
    let max = checkpoints.iter().copied().max().unwrap_or(0);
    let vals = a.two_sided_values(2 * max as usize + 1);
    cesaro_from_two_sided(&vals, checkpoints, method)
}

/// Same as [`cesaro_stats`] on values already laid out as `a_0, a_1, a_{−1}, …`.
pub fn cesaro_from_two_sided(vals: &[Complex64], checkpoints: &[u64], method: SumMethod) -> CesaroReport {
    let abs: Vec<f64> = vals.par_iter().map(|v| v.norm()).collect();
    let sq: Vec<f64> = vals.par_iter().map(|v| v.norm_sqr()).collect();
    let cps: Vec<usize> = checkpoints.iter().map(|&c| 2 * c as usize + 1).collect();
    let abs_sums = prefix_sums(&abs, &cps, method);
    let sq_sums = prefix_sums(&sq, &cps, method);
    let rows: Vec<CesaroRow> = checkpoints
        .iter()
        .zip(abs_sums.iter().zip(&sq_sums))
        .map(|(&n, (a, s))| {
            let len = (2 * n + 1) as f64;
            CesaroRow {
                n,
                abs_avg: a / len,
                sq_avg: s / len,
            }
        })
        .collect();
    let quadratic_norm = rows
        .iter()
        .max_by_key(|r| r.n)
        .map_or(0.0, |r| r.sq_avg.sqrt());
    CesaroReport { rows, quadratic_norm }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{Basis, GeneratorSet, PhasePolynomial, PhaseScalar};
    use crate::nilseq::{indicator, poly_exp, Tag};

    fn trial_mu(mut n: u64) -> i8 {
        let mut mu = 1i8;
        let mut p = 2;
        while p * p <= n {
            if n % p == 0 {
                n /= p;
                if n % p == 0 {
                    return 0;
                }
                mu = -mu;
            }
            p += 1;
        }
        if n > 1 {
            mu = -mu;
        }
        mu
    }

    #[test]
    fn first_values() {
        let t = sieve_mobius(10).unwrap();
        let v: Vec<i8> = t.values().collect();
        assert_eq!(v, vec![1, -1, -1, 0, -1, 1, -1, 0, 0, 1]);
        assert_eq!(sieve_mobius(210).unwrap().get(210), 1);
    }

    #[test]
    fn matches_trial_division_with_small_segments() {
        let n = 20_000;
        let opts = SieveOptions { segment: 37, cap: DEFAULT_CAP };
        let t = sieve_mobius_with(n, opts).unwrap();
        for k in 1..=n {
            assert_eq!(t.get(k), trial_mu(k), "n={k}");
        }
        assert_eq!(t, sieve_mobius(n).unwrap());
    }

    #[test]
    fn divisor_sum_identity() {
        let n = 10_000u64;
        let t = sieve_mobius(n).unwrap();
        let mut acc = vec![0i64; n as usize + 1];
        for d in 1..=n {
            let mu = t.get(d) as i64;
            let mut m = d;
            while m <= n {
                acc[m as usize] += mu;
                m += d;
            }
        }
        assert_eq!(acc[1], 1);
        assert!(acc[2..].iter().all(|&v| v == 0));
    }

    #[test]
    fn mertens_examples() {
        let t = sieve_mobius(100).unwrap();
        assert_eq!(mertens(&t, &[1, 10, 100]).unwrap(), vec![1, -1, 1]);
        assert!(mertens(&t, &[101]).is_err());
    }

    #[test]
    fn limit_cap() {
        let opts = SieveOptions { segment: 1024, cap: 1000 };
        assert_eq!(
            sieve_mobius_with(1001, opts).unwrap_err(),
            Error::LimitTooLarge { requested: 1001, cap: 1000 }
        );
    }

    #[test]
    fn cache_round_trip() {
        let dir = std::env::temp_dir().join(format!("nilseq-mob-{}", std::process::id()));
        let t = load_or_sieve(12_345, Some(&dir), SieveOptions::default()).unwrap();
        let path = dir.join("mobius_12345.bin");
        let bytes = fs::read(&path).unwrap();
        assert_eq!(&bytes[..4], b"MOB1");
        assert_eq!(u64::from_le_bytes(bytes[4..12].try_into().unwrap()), 12_345);
        // μ(1) = 1, μ(2) = μ(3) = −1, μ(4) = 0 → 00 10 10 01
        assert_eq!(bytes[12], 0b0010_1001);
        assert_eq!(MobiusTable::read_cache(&path).unwrap(), t);
        assert_eq!(load_or_sieve(12_345, Some(&dir), SieveOptions::default()).unwrap(), t);
        fs::remove_dir_all(&dir).unwrap();
        assert!(MobiusTable::from_bytes(b"MOB2\0\0\0\0\0\0\0\0").is_err());
    }

    #[test]
    fn correlation_examples() {
        let t = sieve_mobius(10).unwrap();
        let one = SequenceStream::constant(Complex64::new(1.0, 0.0));
        let r = correlate(&t, &one, &[10], SumMethod::Pairwise).unwrap();
        assert_eq!(r.rows[0].re_s, -0.1);
        let table = t.clone();
        let mu = SequenceStream::new(
            move |n| Complex64::new(if n >= 1 { table.get(n as u64) as f64 } else { 0.0 }, 0.0),
            Some(1.0),
            Tag::Unknown,
            "mu",
        );
        let r = correlate(&t, &mu, &[10], SumMethod::Pairwise).unwrap();
        assert_eq!(r.rows[0].re_s, 0.7);
        let zero = SequenceStream::constant(Complex64::new(0.0, 0.0));
        assert_eq!(correlate(&t, &zero, &[10], SumMethod::Pairwise).unwrap().rows[0].abs_s, 0.0);
        let unbounded = SequenceStream::new(|n| Complex64::new(n as f64, 0.0), None, Tag::Unknown, "n");
        assert_eq!(
            correlate(&t, &unbounded, &[10], SumMethod::Pairwise).unwrap_err(),
            Error::UnboundedSequence
        );
    }

    #[test]
    fn csv_header_only_for_empty_checkpoints() {
        let t = sieve_mobius(10).unwrap();
        let one = SequenceStream::constant(Complex64::new(1.0, 0.0));
        let r = correlate(&t, &one, &[], SumMethod::Pairwise).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "N,re_S,im_S,abs_S\n");
    }

    #[test]
    fn cesaro_examples() {
        let one = SequenceStream::constant(Complex64::new(1.0, 0.0));
        let r = cesaro_stats(&one, &[10, 100], SumMethod::Pairwise);
        assert!(r.rows.iter().all(|row| row.abs_avg == 1.0 && row.sq_avg == 1.0));
        let ind = cesaro_stats(&indicator(&[0]), &[10, 1000], SumMethod::Pairwise);
        assert_eq!(ind.rows[0].abs_avg, 1.0 / 21.0);
        assert_eq!(ind.rows[1].abs_avg, 1.0 / 2001.0);
        let mut gs = GeneratorSet::new();
        gs.declare("g1 = sqrt2 : 1.41421356237309504880").unwrap();
        let p = PhasePolynomial::new(vec![PhaseScalar::zero(), gs.parse("g1").unwrap()], Basis::Monomial);
        let r = cesaro_stats(&poly_exp(&p), &[1000], SumMethod::Pairwise);
        assert!((r.rows[0].abs_avg - 1.0).abs() < 1e-12);
    }

    #[test]
    fn default_checkpoint_ladder() {
        assert_eq!(default_checkpoints(1000), vec![1, 10, 100, 1000]);
        assert_eq!(default_checkpoints(2500), vec![1, 10, 100, 1000, 2500]);
    }
}
