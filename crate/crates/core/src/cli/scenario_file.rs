//! Plain-text scenario files.
//!
//! One `key = value` per line, `#` starts a comment. Keys:
//!
//! ```text
//! id = e1
//! mode = bilinear            # or iterated
//! form = dual                # or ball
//! path = auto                # closed | quadrature
//! grid = 2048                # condition grid points
//! n = 1
//! p1 = 2                     # bilinear: p1 p2 q
//! p2 = 2
//! q = 2
//! u = power 1 3
//! v1 = power 1 3
//! v2 = power 1 3
//! # iterated: p q theta, weights u v, measure lines
//! mu.atom = 1 0.5            # repeatable: location mass
//! mu.density = power 1 -0.5
//! ```
//!
//! Weight specs: `power c alpha`, `piecewise <breaks> <c:alpha,...>`,
//! `table <path> tail0 <e> tailinf <e>`, `zero`, `infinite`.
//! Values may reference sweep variables as `$name`; a sweep file adds lines
//! `sweep.name = v1 v2 ...` and expands to the Cartesian product, first
//! variable slowest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::scenario::{Form, PathMode, Scenario};
use crate::stieltjes::BorelMeasure;
use crate::weights::RadialWeight;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

/// A parsed but not yet assembled scenario document.
#[derive(Clone, Debug, Default)]
pub struct Document {
    /// `key → (line, raw value)`.
    entries: BTreeMap<String, (usize, String)>,
    atoms: Vec<(usize, String)>,
    /// Sweep variables in file order.
    sweeps: Vec<(usize, String, Vec<String>)>,
    base: PathBuf,
}

const KEYS: [&str; 17] = [
    "id", "mode", "form", "path", "grid", "n", "p1", "p2", "q", "p", "theta", "u", "v1", "v2", "v", "mu.density", "mu.atom",
];

impl Document {
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut doc = Document { base: base.to_path_buf(), ..Default::default() };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| parse_err(line, format!("expected `key = value`, got `{body}`")))?;
            let (key, value) = (key.trim(), value.trim().to_string());
            if let Some(name) = key.strip_prefix("sweep.") {
                let vals: Vec<String> = value.split_whitespace().map(str::to_string).collect();
                if name.is_empty() || vals.is_empty() {
                    return Err(parse_err(line, "sweep needs a name and at least one value"));
                }
                doc.sweeps.push((line, name.to_string(), vals));
            } else if key == "mu.atom" {
                doc.atoms.push((line, value));
            } else if KEYS.contains(&key) {
                if doc.entries.insert(key.to_string(), (line, value)).is_some() {
                    return Err(parse_err(line, format!("duplicate key `{key}`")));
                }
            } else {
                return Err(parse_err(line, format!("unknown key `{key}`")));
            }
        }
        Ok(doc)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        Document::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn is_sweep(&self) -> bool {
        !self.sweeps.is_empty()
    }

    /// All variable bindings of the sweep, first variable slowest.
    pub fn bindings(&self) -> Vec<Vec<(String, String)>> {
        let mut out = vec![vec![]];
        for (_, name, vals) in &self.sweeps {
            out = out
                .into_iter()
                .flat_map(|b: Vec<(String, String)>| {
                    vals.iter().map(move |v| {
                        let mut b = b.clone();
                        b.push((name.clone(), v.clone()));
                        b
                    })
                })
                .collect();
        }
        out
    }

    /// Every scenario of the document; a plain file gives one.
    pub fn scenarios(&self) -> Result<Vec<Scenario>> {
        let all = self.bindings();
        let many = all.len() > 1 || self.is_sweep();
        all.iter()
            .enumerate()
            .map(|(i, b)| {
                let s = self.assemble(b)?;
                Ok(if many { s.clone().with_id(format!("{}#{i}", s.id)) } else { s })
            })
            .collect()
    }

    /// The single scenario of a plain file.
    pub fn scenario(&self) -> Result<Scenario> {
        if let Some((line, ..)) = self.sweeps.first() {
            return Err(parse_err(*line, "sweep variables need the sweep command"));
        }
        self.assemble(&[])
    }

    fn value(&self, key: &str, vars: &[(String, String)]) -> Result<Option<(usize, String)>> {
        let Some((line, raw)) = self.entries.get(key) else { return Ok(None) };
        Ok(Some((*line, substitute(*line, raw, vars)?)))
    }

    fn required(&self, key: &str, vars: &[(String, String)]) -> Result<(usize, String)> {
        self.value(key, vars)?.ok_or_else(|| parse_err(0, format!("missing key `{key}`")))
    }

    fn number(&self, key: &str, vars: &[(String, String)]) -> Result<f64> {
        let (line, v) = self.required(key, vars)?;
        parse_num(line, &v)
    }

    fn weight(&self, key: &str, vars: &[(String, String)]) -> Result<RadialWeight> {
        let (line, v) = self.required(key, vars)?;
        parse_weight(line, &v, &self.base)
    }

    fn assemble(&self, vars: &[(String, String)]) -> Result<Scenario> {
        let mode = self.value("mode", vars)?.map(|(_, v)| v).unwrap_or_else(|| "bilinear".into());
        let (nline, n) = self.required("n", vars)?;
        let n: usize = n.parse().map_err(|_| parse_err(nline, format!("dimension `{n}` is not a positive integer")))?;
        let wrap = |line: usize| move |e: Error| match e {
            Error::Parse { .. } | Error::Io(_) => e,
            other => parse_err(line, other.to_string()),
        };
        let s = match mode.as_str() {
            "bilinear" => {
                for k in ["p", "theta", "v", "mu.density"] {
                    if let Some((line, _)) = self.entries.get(k) {
                        return Err(parse_err(*line, format!("key `{k}` belongs to iterated mode")));
                    }
                }
                if let Some((line, _)) = self.atoms.first() {
                    return Err(parse_err(*line, "measures belong to iterated mode"));
                }
                let (p1, p2, q) = (self.number("p1", vars)?, self.number("p2", vars)?, self.number("q", vars)?);
                let (u, v1, v2) = (self.weight("u", vars)?, self.weight("v1", vars)?, self.weight("v2", vars)?);
                Scenario::bilinear(n, p1, p2, q, u, v1, v2).map_err(wrap(self.entries["q"].0))?
            }
            "iterated" => {
                for k in ["p1", "p2", "v1", "v2"] {
                    if let Some((line, _)) = self.entries.get(k) {
                        return Err(parse_err(*line, format!("key `{k}` belongs to bilinear mode")));
                    }
                }
                let (p, q, theta) = (self.number("p", vars)?, self.number("q", vars)?, self.number("theta", vars)?);
                let (u, v) = (self.weight("u", vars)?, self.weight("v", vars)?);
                let mut mu = BorelMeasure::zero();
                if self.entries.contains_key("mu.density") {
                    mu.density = Some(self.weight("mu.density", vars)?);
                }
                for (line, raw) in &self.atoms {
                    let raw = substitute(*line, raw, vars)?;
                    let nums = numbers(*line, &raw)?;
                    let [x, m] = nums[..] else { return Err(parse_err(*line, "an atom is `location mass`")) };
                    mu.atoms.push((x, m));
                }
                Scenario::iterated(n, p, q, theta, u, v, mu).map_err(wrap(self.entries["theta"].0))?
            }
            other => return Err(parse_err(self.entries["mode"].0, format!("mode `{other}` is neither bilinear nor iterated"))),
        };
        let mut s = s.with_id(self.value("id", vars)?.map(|(_, v)| v).unwrap_or_else(|| "scenario".into()));
        if let Some((line, f)) = self.value("form", vars)? {
            s = s.with_form(match f.as_str() {
                "dual" => Form::Dual,
                "ball" => Form::Ball,
                _ => return Err(parse_err(line, format!("form `{f}` is neither ball nor dual"))),
            });
        }
        if let Some((line, p)) = self.value("path", vars)? {
            s = s.with_path(match p.as_str() {
                "auto" => PathMode::Auto,
                "closed" => PathMode::Closed,
                "quadrature" => PathMode::Quadrature,
                _ => return Err(parse_err(line, format!("path `{p}` is not auto, closed or quadrature"))),
            });
        }
        if let Some((line, g)) = self.value("grid", vars)? {
            let points = g.parse().ok().filter(|k| *k >= 16).ok_or_else(|| parse_err(line, format!("grid `{g}` is not an integer ≥ 16")))?;
            s = s.with_grid(GridSpec::with_points(points));
        }
        Ok(s)
    }
}

/// Replaces `$name` by its binding.
fn substitute(line: usize, raw: &str, vars: &[(String, String)]) -> Result<String> {
    if !raw.contains('$') {
        return Ok(raw.to_string());
    }
    let mut out = String::new();
    let mut rest = raw;
    while let Some(pos) = rest.find('$') {
        out.push_str(&rest[..pos]);
        let tail = &rest[pos + 1..];
        let end = tail.find(|c: char| !(c.is_alphanumeric() || c == '_')).unwrap_or(tail.len());
        let name = &tail[..end];
        let (_, v) = vars.iter().find(|(k, _)| k == name).ok_or_else(|| parse_err(line, format!("unbound variable `${name}`")))?;
        out.push_str(v);
        rest = &tail[end..];
    }
    out.push_str(rest);
    Ok(out)
}

/// A number, with `inf` for `+∞`.
fn parse_num(line: usize, s: &str) -> Result<f64> {
    match s {
        "inf" | "∞" => Ok(f64::INFINITY),
        _ => s.parse::<f64>().ok().filter(|x| !x.is_nan()).ok_or_else(|| parse_err(line, format!("`{s}` is not a number"))),
    }
}

fn numbers(line: usize, s: &str) -> Result<Vec<f64>> {
    s.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).map(|t| parse_num(line, t)).collect()
}

fn parse_weight(line: usize, spec: &str, base: &Path) -> Result<RadialWeight> {
    let mut words = spec.split_whitespace();
    let kind = words.next().ok_or_else(|| parse_err(line, "empty weight spec"))?;
    let rest: Vec<&str> = words.collect();
    let w = match kind {
        "zero" if rest.is_empty() => RadialWeight::zero(),
        "infinite" if rest.is_empty() => RadialWeight::Infinite,
        "power" => {
            let [c, a] = rest[..] else { return Err(parse_err(line, "`power c alpha` takes two numbers")) };
            RadialWeight::power(parse_num(line, c)?, parse_num(line, a)?)
        }
        "piecewise" => {
            let [breaks, pieces] = rest[..] else { return Err(parse_err(line, "`piecewise <breaks> <c:alpha,...>`")) };
            let breaks = numbers(line, breaks)?;
            let pieces = pieces
                .split(',')
                .map(|p| {
                    let (c, a) = p.split_once(':').ok_or_else(|| parse_err(line, format!("piece `{p}` is not `c:alpha`")))?;
                    Ok((parse_num(line, c)?, parse_num(line, a)?))
                })
                .collect::<Result<Vec<_>>>()?;
            RadialWeight::PiecewisePower { breaks, pieces }
        }
        "table" => {
            let [path, "tail0", t0, "tailinf", ti] = rest[..] else {
                return Err(parse_err(line, "`table <path> tail0 <e> tailinf <e>`"));
            };
            let (radii, values) = read_table(line, &base.join(path))?;
            RadialWeight::Tabulated { radii, values, tail0: parse_num(line, t0)?, tailinf: parse_num(line, ti)? }
        }
        _ => return Err(parse_err(line, format!("unknown weight spec `{spec}`"))),
    };
    w.validate().map_err(|e| parse_err(line, e.to_string()))?;
    Ok(w)
}

/// Two whitespace-separated columns `radius value`; `#` comments.
fn read_table(line: usize, path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path).map_err(|e| parse_err(line, format!("{}: {e}", path.display())))?;
    let mut radii = Vec::new();
    let mut values = Vec::new();
    for row in text.lines() {
        let row = row.split('#').next().unwrap_or("").trim();
        if row.is_empty() {
            continue;
        }
        let nums = numbers(line, row)?;
        let [r, v] = nums[..] else { return Err(parse_err(line, format!("table row `{row}` needs two columns"))) };
        radii.push(r);
        values.push(v);
    }
    Ok((radii, values))
}

#[cfg(test)]
mod tests {
    use super::*;

    const E1: &str = "id = e1\nn = 1\np1 = 2\np2 = 2\nq = 2\nu = power 1 3\nv1 = power 1 3\nv2 = power 1 3\n";

    fn doc(text: &str) -> Result<Document> {
        Document::parse(text, Path::new("."))
    }

    #[test]
    fn e1_parses() {
        let s = doc(E1).unwrap().scenario().unwrap();
        assert_eq!(s.id, "e1");
        assert!(s.is_power());
    }

    #[test]
    fn errors_carry_lines() {
        let bad = E1.replace("q = 2", "q = two");
        match doc(&bad).unwrap().scenario() {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
        assert!(matches!(doc("n 1"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(doc(&format!("{E1}colour = red\n")), Err(Error::Parse { line: 9, .. })));
        let q0 = E1.replace("q = 2", "q = 0");
        assert!(matches!(doc(&q0).unwrap().scenario(), Err(Error::Parse { line: 5, .. })));
    }

    #[test]
    fn iterated_with_measure() {
        let text = "mode = iterated\nn = 1\np = 1\nq = 1\ntheta = 1\nu = power 1 0\nv = piecewise 1 1:0,2:1\nmu.atom = 1 1\nmu.atom = 2 0.5\n";
        let s = doc(text).unwrap().scenario().unwrap();
        assert!(s.is_iterated());
        let crate::scenario::Problem::Iterated { mu, .. } = &s.problem else { unreachable!() };
        assert_eq!(mu.atoms, vec![(1.0, 1.0), (2.0, 0.5)]);
    }

    #[test]
    fn sweep_expands_in_order() {
        let text = format!("{}sweep.a = 3 4 5\nsweep.b = 1 2 3\n", E1.replace("u = power 1 3", "u = power $b $a"));
        let d = doc(&text).unwrap();
        let all = d.scenarios().unwrap();
        assert_eq!(all.len(), 9);
        assert_eq!(all[0].id, "e1#0");
        let b = d.bindings();
        assert_eq!(b[1], vec![("a".to_string(), "3".to_string()), ("b".to_string(), "2".to_string())]);
        assert!(d.scenario().is_err());
    }

    #[test]
    fn table_weight_reads_file() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("w.txt"), "# r v\n0.5 1\n1 2\n2 4\n").unwrap();
        let text = E1.replace("v2 = power 1 3", "v2 = table w.txt tail0 1 tailinf 1");
        let d = Document::parse(&text, dir.path()).unwrap();
        let s = d.scenario().unwrap();
        assert!(!s.is_power());
    }
}
