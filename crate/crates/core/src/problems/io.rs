//! `SPLIT-INST v1` text format.
//!
//! ```text
//! SPLIT-INST v1
//! <kind>
//! <m> <n>
//! <seed>
//! <key> <values...>        parameter lines, any order
//! data
//! <entries>                whitespace separated
//! ```
//!
//! Parameter keys: `operator dense|identity|blur <ksize> <sigma> <height> <width>`,
//! `noise <sigma>`, `reg <w>`, `density <d>`, `scad <xi> <c>`,
//! `lines <d1x> <d1y> <d2x> <d2y> <x0> <y0>`, `x_true 0|1`, `box 0|1`.
//! The data section holds, in order: `D` row-major (dense operators only),
//! `b`, then `x_true` and the box bounds `lo`, `hi` when flagged. Floats are
//! written in shortest round-trip form, so loading reproduces every value
//! exactly.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use crate::linalg::{BlurMap, DenseMatrix, Vector};
use crate::prox::ScadParams;

use super::{LinePair, Operator, ProblemError, ProblemInstance, ProblemKind, Result};

pub const FORMAT_MAGIC: &str = "SPLIT-INST v1";

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(" ")
}

pub fn write_instance<W: Write>(mut out: W, inst: &ProblemInstance) -> std::io::Result<()> {
    let (m, n) = inst.dims();
    writeln!(out, "{FORMAT_MAGIC}")?;
    writeln!(out, "{}", inst.kind.name())?;
    writeln!(out, "{m} {n}")?;
    writeln!(out, "{}", inst.seed)?;
    match &inst.operator {
        Operator::Dense(_) => writeln!(out, "operator dense")?,
        Operator::Identity(_) => writeln!(out, "operator identity")?,
        Operator::Blur(b) => writeln!(
            out,
            "operator blur {} {} {} {}",
            b.ksize(),
            b.sigma(),
            b.height(),
            b.width()
        )?,
    }
    writeln!(out, "noise {}", inst.noise_sigma)?;
    if let Some(r) = inst.reg {
        writeln!(out, "reg {r}")?;
    }
    if let Some(d) = inst.density {
        writeln!(out, "density {d}")?;
    }
    if let Some(p) = inst.scad {
        writeln!(out, "scad {} {}", p.xi, p.c)?;
    }
    if let Some(l) = &inst.lines {
        writeln!(out, "lines {} {} {}", join(l.d1.as_slice()), join(l.d2.as_slice()), join(l.start.as_slice()))?;
    }
    writeln!(out, "x_true {}", u8::from(inst.x_true.is_some()))?;
    writeln!(out, "box {}", u8::from(inst.bounds.is_some()))?;
    writeln!(out, "data")?;
    if let Operator::Dense(d) = &inst.operator {
        for i in 0..d.rows() {
            writeln!(out, "{}", join(d.row(i)))?;
        }
    }
    writeln!(out, "{}", join(inst.b.as_slice()))?;
    if let Some(x) = &inst.x_true {
        writeln!(out, "{}", join(x.as_slice()))?;
    }
    if let Some((lo, hi)) = &inst.bounds {
        writeln!(out, "{}", join(lo.as_slice()))?;
        writeln!(out, "{}", join(hi.as_slice()))?;
    }
    Ok(())
}

pub fn save_instance(inst: &ProblemInstance, path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    write_instance(&mut buf, inst)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<ProblemInstance> {
    let text = fs::read_to_string(path)?;
    parse_instance(&text)
}

fn err(line: usize, msg: impl Into<String>) -> ProblemError {
    ProblemError::Parse { line, msg: msg.into() }
}

fn num<T: std::str::FromStr>(line: usize, tok: &str, what: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| err(line, format!("invalid {what} {tok:?}")))
}

fn float(line: usize, tok: &str) -> Result<f64> {
    let x: f64 = num(line, tok, "number")?;
    if !x.is_finite() {
        return Err(err(line, format!("non-finite value {tok:?}")));
    }
    Ok(x)
}

fn flag(line: usize, args: &[&str]) -> Result<bool> {
    match args {
        ["0"] => Ok(false),
        ["1"] => Ok(true),
        _ => Err(err(line, "expected 0 or 1")),
    }
}

fn floats<const K: usize>(line: usize, key: &str, args: &[&str]) -> Result<[f64; K]> {
    if args.len() != K {
        return Err(err(line, format!("{key} expects {K} values, got {}", args.len())));
    }
    let mut out = [0.0; K];
    for (o, a) in out.iter_mut().zip(args) {
        *o = float(line, a)?;
    }
    Ok(out)
}

enum OpSpec {
    Dense,
    Identity,
    Blur { ksize: usize, sigma: f64, height: usize, width: usize },
}

/// Data tokens tagged with their line numbers.
struct Tokens<'a> {
    items: Vec<(usize, &'a str)>,
    pos: usize,
    last_line: usize,
}

impl Tokens<'_> {
    fn take(&mut self, count: usize, what: &str) -> Result<Vec<f64>> {
        if self.pos + count > self.items.len() {
            return Err(err(
                self.last_line,
                format!(
                    "unexpected end of data while reading {what}: need {count} values, {} left",
                    self.items.len() - self.pos
                ),
            ));
        }
        let out = self.items[self.pos..self.pos + count]
            .iter()
            .map(|(l, t)| float(*l, t))
            .collect::<Result<Vec<_>>>()?;
        self.pos += count;
        Ok(out)
    }
}

pub fn parse_instance(text: &str) -> Result<ProblemInstance> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut header = |what: &str| -> Result<(usize, &str)> {
        lines
            .next()
            .ok_or_else(|| err(0, format!("unexpected end of file, expected {what}")))
    };

    let (ln, magic) = header("format line")?;
    if magic != FORMAT_MAGIC {
        return Err(err(ln, format!("expected {FORMAT_MAGIC:?}, found {magic:?}")));
    }
    let (ln, kind) = header("kind")?;
    let kind = ProblemKind::parse(kind).ok_or_else(|| err(ln, format!("unknown kind {kind:?}")))?;
    let (ln, dims) = header("dimensions")?;
    let dims: Vec<&str> = dims.split_whitespace().collect();
    let [m, n] = dims[..] else {
        return Err(err(ln, "expected `m n`"));
    };
    let (m, n): (usize, usize) = (num(ln, m, "dimension")?, num(ln, n, "dimension")?);
    if m == 0 || n == 0 {
        return Err(err(ln, "dimensions must be positive"));
    }
    let (ln, seed) = header("seed")?;
    let seed: u64 = num(ln, seed, "seed")?;

    let mut op = None;
    let mut noise = None;
    let mut reg = None;
    let mut density = None;
    let mut scad = None;
    let mut line_pair = None;
    let mut has_x = None;
    let mut has_box = None;
    let mut data_line = None;
    for (ln, line) in lines.by_ref() {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap_or_default();
        let args: Vec<&str> = parts.collect();
        match key {
            "data" => {
                data_line = Some(ln);
                break;
            }
            "operator" => {
                op = Some(match args[..] {
                    ["dense"] => OpSpec::Dense,
                    ["identity"] => OpSpec::Identity,
                    ["blur", k, s, h, w] => OpSpec::Blur {
                        ksize: num(ln, k, "kernel size")?,
                        sigma: float(ln, s)?,
                        height: num(ln, h, "height")?,
                        width: num(ln, w, "width")?,
                    },
                    _ => return Err(err(ln, "expected `operator dense|identity|blur k sigma h w`")),
                })
            }
            "noise" => noise = Some(floats::<1>(ln, key, &args)?[0]),
            "reg" => reg = Some(floats::<1>(ln, key, &args)?[0]),
            "density" => density = Some(floats::<1>(ln, key, &args)?[0]),
            "scad" => {
                let [xi, c] = floats::<2>(ln, key, &args)?;
                scad = Some(ScadParams::new(xi, c).map_err(|e| err(ln, e.to_string()))?);
            }
            "lines" => {
                let v = floats::<6>(ln, key, &args)?;
                let vec2 = |a: f64, b: f64| Vector::new(vec![a, b]).map_err(|e| err(ln, e.to_string()));
                line_pair = Some(LinePair {
                    d1: vec2(v[0], v[1])?,
                    d2: vec2(v[2], v[3])?,
                    start: vec2(v[4], v[5])?,
                });
            }
            "x_true" => has_x = Some(flag(ln, &args)?),
            "box" => has_box = Some(flag(ln, &args)?),
            other => return Err(err(ln, format!("unknown parameter {other:?}"))),
        }
    }
    let data_line = data_line.ok_or_else(|| err(0, "missing `data` line"))?;
    let op = op.ok_or_else(|| err(data_line, "missing `operator` line"))?;

    let mut tokens = Tokens {
        items: Vec::new(),
        pos: 0,
        last_line: data_line,
    };
    for (ln, line) in lines {
        tokens.last_line = ln;
        tokens.items.extend(line.split_whitespace().map(|t| (ln, t)));
    }

    let operator = match op {
        OpSpec::Dense => {
            let entries = tokens.take(m * n, "D")?;
            Operator::Dense(Arc::new(DenseMatrix::new(m, n, entries)?))
        }
        OpSpec::Identity => {
            if m != n {
                return Err(err(data_line, "identity operator needs m = n"));
            }
            Operator::Identity(n)
        }
        OpSpec::Blur {
            ksize,
            sigma,
            height,
            width,
        } => {
            if height * width != n || m != n {
                return Err(err(data_line, format!("blur {height}x{width} does not match dims {m} {n}")));
            }
            Operator::Blur(Arc::new(
                BlurMap::new(height, width, ksize, sigma).map_err(|e| err(data_line, e.to_string()))?,
            ))
        }
    };
    let b = Vector::new(tokens.take(m, "b")?)?;
    let x_true = match has_x {
        Some(true) => Some(Vector::new(tokens.take(n, "x_true")?)?),
        _ => None,
    };
    let bounds = match has_box {
        Some(true) => {
            let lo = Vector::new(tokens.take(n, "lo")?)?;
            let hi = Vector::new(tokens.take(n, "hi")?)?;
            Some((lo, hi))
        }
        _ => None,
    };
    if let Some((l, t)) = tokens.items.get(tokens.pos) {
        return Err(err(*l, format!("trailing data starting at {t:?}")));
    }
    if kind == ProblemKind::Feas2d && line_pair.is_none() {
        return Err(err(data_line, "feas2d instance needs a `lines` parameter"));
    }

    Ok(ProblemInstance {
        kind,
        seed,
        operator,
        b,
        x_true,
        reg,
        scad: scad.or((kind == ProblemKind::Scad).then(ScadParams::default)),
        bounds,
        lines: line_pair,
        noise_sigma: noise.unwrap_or(0.0),
        density,
    })
}
