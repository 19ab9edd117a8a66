use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use super::MolecularSystem;
use crate::error::{io_err, Error, Result};
use crate::tensor::Tensor4;

pub fn read_fcidump(path: impl AsRef<Path>) -> Result<MolecularSystem> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_fcidump(&text)
}

/// Parses an FCIDUMP file (namelist header, then `value i j k l` records).
pub fn parse_fcidump(text: &str) -> Result<MolecularSystem> {
    let upper_start = text
        .find("&FCI")
        .or_else(|| text.find("&fci"))
        .ok_or_else(|| Error::Header("missing &FCI".into()))?;
    let rest = &text[upper_start + 4..];
    let (header, body, header_end_line) = split_header(text, rest)?;
    let fields = parse_namelist(header)?;

    let get = |key: &str| -> Result<i64> {
        let vals = fields
            .get(key)
            .ok_or_else(|| Error::Header(format!("missing {key}")))?;
        let first = vals
            .first()
            .ok_or_else(|| Error::Header(format!("{key} has no value")))?;
        first
            .parse::<i64>()
            .map_err(|_| Error::Header(format!("{key}={first} is not an integer")))
    };
    let norb = get("NORB")?;
    let nelec = get("NELEC")?;
    let ms2 = fields.get("MS2").map(|_| get("MS2")).transpose()?.unwrap_or(0);
    if norb <= 0 {
        return Err(Error::Header(format!("NORB={norb}")));
    }
    if ms2 != 0 {
        return Err(Error::Header(format!("MS2={ms2}: only closed-shell systems are supported")));
    }
    let n = norb as usize;

    let mut h = DMatrix::zeros(n, n);
    let mut eri = Tensor4::zeros(n);
    let mut e_const = 0.0;
    for (k, line) in body.lines().enumerate() {
        let lineno = header_end_line + k + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| Error::Integral { line: lineno, msg };
        let mut it = line.split_whitespace();
        let value = it
            .next()
            .map(|s| s.replace(['D', 'd'], "E"))
            .unwrap()
            .parse::<f64>()
            .map_err(|_| bad(format!("bad value in {line:?}")))?;
        let idx: Vec<i64> = it
            .map(|s| s.parse::<i64>().map_err(|_| bad(format!("bad index {s:?}"))))
            .collect::<Result<_>>()?;
        if idx.len() != 4 {
            return Err(bad(format!("expected 4 indices, found {}", idx.len())));
        }
        for &i in &idx {
            if i < 0 || i > norb {
                return Err(bad(format!("index {i} outside [1, {norb}]")));
            }
        }
        let [i, j, k, l] = [idx[0], idx[1], idx[2], idx[3]];
        let z = |x: i64| (x - 1) as usize;
        match (i, j, k, l) {
            (0, 0, 0, 0) => e_const += value,
            // orbital energies; not needed
            (_, 0, 0, 0) => {}
            (i, j, 0, 0) if i > 0 && j > 0 => {
                h[(z(i), z(j))] = value;
                h[(z(j), z(i))] = value;
            }
            (i, j, k, l) if i > 0 && j > 0 && k > 0 && l > 0 => {
                eri.set_sym8(z(i), z(j), z(k), z(l), value)
            }
            _ => return Err(bad(format!("invalid index pattern {i} {j} {k} {l}"))),
        }
    }
    if nelec < 0 {
        return Err(Error::Header(format!("NELEC={nelec}")));
    }
    MolecularSystem::new(nelec as usize, e_const, h, eri)
}

// Returns (header text, body text, line number of header end).
fn split_header<'a>(text: &'a str, rest: &'a str) -> Result<(&'a str, &'a str, usize)> {
    let up = rest.to_ascii_uppercase();
    let (end, len) = match (up.find("&END"), find_slash_terminator(rest)) {
        (Some(e), _) => (e, 4),
        (None, Some(s)) => (s, 1),
        (None, None) => return Err(Error::Header("missing &END".into())),
    };
    let header = &rest[..end];
    let body_start = &rest[end + len..];
    let body = match body_start.find('\n') {
        Some(nl) => &body_start[nl + 1..],
        None => "",
    };
    let consumed = text.len() - body.len();
    let header_end_line = text[..consumed].lines().count();
    Ok((header, body, header_end_line))
}

fn find_slash_terminator(rest: &str) -> Option<usize> {
    rest.lines()
        .scan(0usize, |pos, l| {
            let start = *pos;
            *pos += l.len() + 1;
            Some((start, l))
        })
        .find(|(_, l)| l.trim() == "/")
        .map(|(start, l)| start + l.find('/').unwrap())
}

fn parse_namelist(header: &str) -> Result<HashMap<String, Vec<String>>> {
    let mut fields: HashMap<String, Vec<String>> = HashMap::new();
    let mut current: Option<String> = None;
    for tok in header.replace(',', " ").split_whitespace() {
        if let Some((key, val)) = tok.split_once('=') {
            let key = key.trim().to_ascii_uppercase();
            if key.is_empty() {
                return Err(Error::Header(format!("malformed token {tok:?}")));
            }
            let entry = fields.entry(key.clone()).or_default();
            if !val.is_empty() {
                entry.push(val.to_string());
            }
            current = Some(key);
        } else {
            let key = current
                .as_ref()
                .ok_or_else(|| Error::Header(format!("value {tok:?} before any key")))?;
            fields.get_mut(key).unwrap().push(tok.to_string());
        }
    }
    Ok(fields)
}

/// Writes the unique integrals (8-fold / 2-fold compressed), 1-indexed.
pub fn write_fcidump(sys: &MolecularSystem) -> String {
    let n = sys.n_orb;
    let mut out = String::new();
    let orbsym = vec!["1"; n].join(",");
    let _ = writeln!(
        out,
        " &FCI NORB={n},NELEC={},MS2=0,\n  ORBSYM={orbsym},\n  ISYM=1,\n &END",
        sys.n_elec
    );
    for p in 0..n {
        for q in 0..=p {
            for r in 0..n {
                for s in 0..=r {
                    if p * (p + 1) / 2 + q < r * (r + 1) / 2 + s {
                        continue;
                    }
                    let v = sys.eri[[p, q, r, s]];
                    if v != 0.0 {
                        let _ = writeln!(out, "{v:.17e} {} {} {} {}", p + 1, q + 1, r + 1, s + 1);
                    }
                }
            }
        }
    }
    for p in 0..n {
        for q in 0..=p {
            let v = sys.h[(p, q)];
            if v != 0.0 {
                let _ = writeln!(out, "{v:.17e} {} {} 0 0", p + 1, q + 1);
            }
        }
    }
    let _ = writeln!(out, "{:.17e} 0 0 0 0", sys.e_const);
    out
}
