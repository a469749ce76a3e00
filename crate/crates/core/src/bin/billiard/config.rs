//! `key = value` run files and list-valued option parsing.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

/// Keys accepted in a config file; the same names as the long flags.
pub const KEYS: &[&str] = &[
    "region",
    "h",
    "chord-tol",
    "order",
    "states",
    "tol",
    "out",
    "indices",
    "sides",
    "radius",
    "metric",
    "resolution",
    "mode",
    "top",
    "strip-width",
];

/// Informational keys written to `run.meta` and ignored on input.
const INFO_KEYS: &[&str] = &["command", "version"];

#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split_once('#').map_or(raw, |(a, _)| a).trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected `key = value`", no + 1))?;
            let key = k.trim().replace('_', "-");
            if INFO_KEYS.contains(&key.as_str()) {
                continue;
            }
            if !KEYS.contains(&key.as_str()) {
                return Err(format!("line {}: unknown key `{}`", no + 1, k.trim()));
            }
            values.insert(key, v.trim().to_string());
        }
        Ok(Self { values })
    }

    /// The flag value if given, else the file value parsed as `T`.
    pub fn pick<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, String>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e| format!("config key `{key}`: {e}")),
        }
    }
}

/// Comma-separated 1-based indices with `a-b` ranges, e.g. `1-16,100,200`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexList(pub Vec<usize>);

impl FromStr for IndexList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let mut out = Vec::new();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad index `{t}`"));
            if let Some((a, b)) = item.split_once("..").or_else(|| item.split_once('-')) {
                let (a, b) = (num(a)?, num(b)?);
                if b < a {
                    return Err(format!("empty range `{item}`"));
                }
                out.extend(a..=b);
            } else {
                out.push(num(item)?);
            }
        }
        if out.is_empty() {
            return Err("empty index list".into());
        }
        if out.contains(&0) {
            return Err("indices are 1-based".into());
        }
        Ok(Self(out))
    }
}

impl Display for IndexList {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        let v = &self.0;
        let mut i = 0;
        while i < v.len() {
            let mut j = i;
            while j + 1 < v.len() && v[j + 1] == v[j] + 1 {
                j += 1;
            }
            parts.push(if j > i + 1 { format!("{}-{}", v[i], v[j]) } else if j == i + 1 {
                format!("{},{}", v[i], v[j])
            } else {
                v[i].to_string()
            });
            i = j + 1;
        }
        f.write_str(&parts.join(","))
    }
}

/// `WxH` raster size.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Resolution {
    pub width: usize,
    pub height: usize,
}

impl FromStr for Resolution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected WxH, got `{s}`"))?;
        let p = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad resolution `{s}`"));
        let (width, height) = (p(w)?, p(h)?);
        if width < 2 || height < 2 {
            return Err(format!("resolution must be at least 2x2, got `{s}`"));
        }
        Ok(Self { width, height })
    }
}

impl Display for Resolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}
