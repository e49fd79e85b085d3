//! Sequence constructor expressions: `name` or `name(key=value, ...)`,
//! values either bare tokens or double-quoted strings.

use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Call {
    pub name: String,
    pub args: BTreeMap<String, String>,
}

impl Call {
    pub fn arg(&self, key: &str) -> Result<&str, String> {
        self.args
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| format!("`{}` needs argument `{key}`", self.name))
    }

    /// Rejects arguments outside `allowed`.
    pub fn only(&self, allowed: &[&str]) -> Result<(), String> {
        match self.args.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(format!("`{}` has no argument `{k}`", self.name)),
            None => Ok(()),
        }
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Splits `body` at top-level commas, honouring double quotes.
fn split_args(body: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    for ch in body.chars() {
        match ch {
            '"' => {
                quoted = !quoted;
                cur.push(ch);
            }
            ',' if !quoted => out.push(std::mem::take(&mut cur)),
            _ => cur.push(ch),
        }
    }
    if quoted {
        return Err("unterminated string in expression".into());
    }
    if !cur.trim().is_empty() || !out.is_empty() {
        out.push(cur);
    }
    Ok(out)
}

pub fn parse(src: &str) -> Result<Call, String> {
    let src = src.trim();
    let (name, body) = match src.find('(') {
        None => (src, None),
        Some(i) => {
            let rest = src[i + 1..]
                .strip_suffix(')')
                .ok_or_else(|| format!("expected `)` at end of `{src}`"))?;
            (src[..i].trim(), Some(rest))
        }
    };
    if !is_ident(name) {
        return Err(format!("bad constructor name `{name}`"));
    }
    let mut args = BTreeMap::new();
    for part in split_args(body.unwrap_or(""))? {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| format!("expected `key=value`, got `{}`", part.trim()))?;
        let k = k.trim();
        if !is_ident(k) {
            return Err(format!("bad argument name `{k}`"));
        }
        let v = v.trim();
        let v = match v.strip_prefix('"') {
            Some(inner) => inner
                .strip_suffix('"')
                .ok_or_else(|| format!("bad quoting in `{v}`"))?,
            None => v,
        };
        if args.insert(k.to_string(), v.to_string()).is_some() {
            return Err(format!("argument `{k}` given twice"));
        }
    }
    Ok(Call {
        name: name.to_string(),
        args,
    })
}
