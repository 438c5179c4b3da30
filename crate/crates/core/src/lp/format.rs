//! Text formats: the native row format (lossless) and CPLEX LP for external
//! solvers.
//!
//! Native layout:
//!
//! ```text
//! vars 12 rows 12
//! env addition 1
//! name 0 (1)
//! data: 1*0 = 0
//! structural: 1*2 -1*3 -1*4 = 0
//! ```
//!
//! Unknown ids are 0-based. `name` and `env` lines may appear anywhere after
//! the header; `#` starts a comment.

use std::collections::HashMap;
use std::io::{self, BufRead, BufWriter, Seek, SeekFrom, Write};

use super::{parse_rational, to_decimal, Objective, Rational};
use crate::error::{Error, Result};
use crate::model::Requirement;
use crate::system::{ConstraintKind, Environment, Equation, LinearConstraint, LpSystem, SystemCounts};

fn env_line(env: &Environment) -> String {
    match env {
        Environment::Addition { n } => format!("env addition {n}"),
        Environment::Multiplication { n, m } => format!("env multiplication {n} {m}"),
        Environment::Generic => "env generic".to_string(),
    }
}

fn write_row<W: Write>(w: &mut W, c: &LinearConstraint) -> io::Result<()> {
    write!(w, "{}:", c.kind.tag())?;
    for (id, v) in &c.terms {
        write!(w, " {v}*{id}")?;
    }
    writeln!(w, " = {}", c.rhs)
}

pub fn write_native<W: Write>(sys: &LpSystem, w: W) -> io::Result<()> {
    let mut w = BufWriter::new(w);
    writeln!(w, "vars {} rows {}", sys.num_unknowns(), sys.constraints().len())?;
    writeln!(w, "{}", env_line(&sys.env))?;
    for (id, label) in sys.labels().iter().enumerate() {
        if let Some(r) = label {
            writeln!(w, "name {id} {r}")?;
        }
    }
    for c in sys.constraints() {
        write_row(&mut w, c)?;
    }
    w.flush()
}

fn parse_env(words: &[&str], line: usize) -> Result<Environment> {
    let num = |s: Option<&&str>| -> Result<u32> {
        s.and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::parse(line, "malformed env line"))
    };
    match words.first().copied() {
        Some("addition") => Ok(Environment::Addition { n: num(words.get(1))? }),
        Some("multiplication") => Ok(Environment::Multiplication {
            n: num(words.get(1))?,
            m: num(words.get(2))?,
        }),
        Some("generic") => Ok(Environment::Generic),
        _ => Err(Error::parse(line, "unknown environment")),
    }
}

fn parse_row(text: &str, vars: usize, line: usize) -> Result<LinearConstraint> {
    let (kind, body) = match text.split_once(':') {
        Some((tag, body)) => (
            ConstraintKind::from_tag(tag.trim())
                .ok_or_else(|| Error::parse(line, format!("unknown row tag `{}`", tag.trim())))?,
            body,
        ),
        None => (ConstraintKind::Extra, text),
    };
    let (lhs, rhs) = body
        .split_once('=')
        .ok_or_else(|| Error::parse(line, "row without `=`"))?;
    let rhs = parse_rational(rhs).ok_or_else(|| Error::parse(line, format!("bad right-hand side `{}`", rhs.trim())))?;
    let mut terms = Vec::new();
    for tok in lhs.split_whitespace() {
        let (c, id) = tok
            .split_once('*')
            .ok_or_else(|| Error::parse(line, format!("term `{tok}` is not coef*id")))?;
        let c = parse_rational(c).ok_or_else(|| Error::parse(line, format!("bad coefficient `{c}`")))?;
        let id: usize = id
            .parse()
            .map_err(|_| Error::parse(line, format!("bad unknown id `{id}`")))?;
        if id >= vars {
            return Err(Error::parse(line, format!("unknown id {id} but only {vars} declared")));
        }
        terms.push((id, c));
    }
    Ok(LinearConstraint::new(kind, terms, rhs))
}

pub fn parse_native<R: BufRead>(input: R) -> Result<LpSystem> {
    let mut sys: Option<LpSystem> = None;
    let mut declared_rows = 0usize;
    let mut vars = 0usize;
    for (i, raw) in input.lines().enumerate() {
        let line = i + 1;
        let raw = raw?;
        let text = raw.split('#').next().unwrap_or("").trim();
        if text.is_empty() {
            continue;
        }
        let words: Vec<&str> = text.split_whitespace().collect();
        let Some(s) = sys.as_mut() else {
            match words.as_slice() {
                ["vars", v, "rows", r] => {
                    vars = v.parse().map_err(|_| Error::parse(line, "bad variable count"))?;
                    declared_rows = r.parse().map_err(|_| Error::parse(line, "bad row count"))?;
                    let mut new = LpSystem::new(Environment::Generic);
                    for _ in 0..vars {
                        new.add_unknown(None)?;
                    }
                    sys = Some(new);
                    continue;
                }
                _ => return Err(Error::parse(line, "expected header `vars <N> rows <R>`")),
            }
        };
        match words[0] {
            "env" => s.env = parse_env(&words[1..], line)?,
            "name" => {
                let [_, id, req] = words.as_slice() else {
                    return Err(Error::parse(line, "expected `name <id> <requirement>`"));
                };
                let id: usize = id.parse().map_err(|_| Error::parse(line, "bad unknown id"))?;
                let r: Requirement = req.parse().map_err(|e| Error::parse(line, format!("{e}")))?;
                s.set_label(id, r).map_err(|e| Error::parse(line, format!("{e}")))?;
            }
            _ => s.push(parse_row(text, vars, line)?)?,
        }
    }
    let sys = sys.ok_or_else(|| Error::parse(0, "missing header"))?;
    if sys.constraints().len() != declared_rows {
        return Err(Error::parse(
            0,
            format!("header declares {declared_rows} rows, found {}", sys.constraints().len()),
        ));
    }
    Ok(sys)
}

fn lp_terms<W: Write>(w: &mut W, terms: &[(usize, Rational)]) -> io::Result<()> {
    for (k, (id, v)) in terms.iter().enumerate() {
        let s = to_decimal(v);
        let (sign, mag) = match s.strip_prefix('-') {
            Some(m) => ("-", m.to_string()),
            None => ("+", s),
        };
        if k > 0 && k % 8 == 0 {
            write!(w, "\n  ")?;
        }
        if k == 0 && sign == "+" {
            write!(w, " {mag} x{id}")?;
        } else {
            write!(w, " {sign} {mag} x{id}")?;
        }
    }
    Ok(())
}

/// CPLEX LP text. Columns are `x<id>`; all columns are nonnegative, which is
/// the format's default bound.
pub fn write_lp<W: Write>(sys: &LpSystem, objective: Option<&Objective>, w: W) -> io::Result<()> {
    let mut w = BufWriter::new(w);
    writeln!(w, "\\ vars {} rows {}", sys.num_unknowns(), sys.constraints().len())?;
    match objective {
        Some(obj) => {
            writeln!(w, "Maximize")?;
            write!(w, " obj:")?;
            lp_terms(&mut w, &obj.terms)?;
        }
        None => {
            writeln!(w, "Minimize")?;
            write!(w, " obj:")?;
            if sys.num_unknowns() > 0 {
                write!(w, " 0 x0")?;
            }
        }
    }
    writeln!(w)?;
    writeln!(w, "Subject To")?;
    for (i, c) in sys.constraints().iter().enumerate() {
        write!(w, " {}{i}:", &c.kind.tag()[..1])?;
        if c.terms.is_empty() {
            write!(w, " 0 x0")?;
        }
        lp_terms(&mut w, &c.terms)?;
        writeln!(w, " = {}", to_decimal(&c.rhs))?;
    }
    writeln!(w, "Bounds")?;
    for id in 0..sys.num_unknowns() {
        writeln!(w, " x{id} >= 0")?;
    }
    writeln!(w, "End")?;
    w.flush()
}

const HEADER_WIDTH: usize = 20;

/// Writes equations in native format as they are produced, numbering
/// requirements on first appearance. The header is reserved up front and
/// filled in by [`NativeStreamWriter::finish`].
pub struct NativeStreamWriter<W: Write + Seek> {
    w: BufWriter<W>,
    ids: HashMap<Requirement, u32>,
    counts: SystemCounts,
}

impl<W: Write + Seek> NativeStreamWriter<W> {
    pub fn new(inner: W, env: Environment) -> io::Result<Self> {
        let mut w = BufWriter::with_capacity(1 << 20, inner);
        write_header(&mut w, 0, 0)?;
        writeln!(w, "{}", env_line(&env))?;
        Ok(NativeStreamWriter {
            w,
            ids: HashMap::new(),
            counts: SystemCounts::default(),
        })
    }

    pub fn push(&mut self, eq: &Equation) -> io::Result<()> {
        let mut ids = [0u32; crate::system::MAX_TERMS];
        for (k, (_, r)) in eq.terms.iter().enumerate() {
            let next = self.ids.len() as u32;
            let id = *self.ids.entry(*r).or_insert(next);
            if id == next {
                if r.is_positive() {
                    self.counts.positive_unknowns += 1;
                }
                writeln!(self.w, "name {id} {r}")?;
            }
            ids[k] = id;
        }
        write!(self.w, "{}:", eq.kind.tag())?;
        for (k, (c, _)) in eq.terms.iter().enumerate() {
            write!(self.w, " {c}*{}", ids[k])?;
        }
        writeln!(self.w, " = {}", eq.rhs)?;
        self.counts.bump(eq.kind);
        Ok(())
    }

    pub fn finish(mut self) -> io::Result<SystemCounts> {
        self.counts.unknowns = self.ids.len() as u64;
        self.w.flush()?;
        let mut inner = self.w.into_inner().map_err(|e| e.into_error())?;
        inner.seek(SeekFrom::Start(0))?;
        write_header(&mut inner, self.counts.unknowns, self.counts.equations)?;
        inner.flush()?;
        Ok(self.counts)
    }
}

fn write_header<W: Write>(w: &mut W, vars: u64, rows: u64) -> io::Result<()> {
    writeln!(w, "vars {vars:<HEADER_WIDTH$} rows {rows:<HEADER_WIDTH$}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::addition::{build_addition, AdditionSpec};
    use std::io::Cursor;

    fn one_bit() -> LpSystem {
        let mut spec = AdditionSpec::new(1).unwrap();
        spec.with_u(0).unwrap().with_v(1).unwrap();
        build_addition(&spec).unwrap()
    }

    #[test]
    fn native_round_trip() {
        let sys = one_bit();
        let mut buf = Vec::new();
        write_native(&sys, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("vars 12 rows 12\n"));
        assert_eq!(parse_native(Cursor::new(buf)).unwrap(), sys);
    }

    #[test]
    fn stream_writer_matches_batch_writer() {
        let mut spec = AdditionSpec::new(2).unwrap();
        spec.with_u(2).unwrap().with_v(3).unwrap();
        let mut cur = Cursor::new(Vec::new());
        let mut sw = NativeStreamWriter::new(&mut cur, Environment::Addition { n: 2 }).unwrap();
        crate::addition::for_each_addition_equation(&spec, |eq| sw.push(&eq).unwrap()).unwrap();
        let counts = sw.finish().unwrap();
        assert_eq!((counts.unknowns, counts.equations), (40, 44));
        let streamed = parse_native(Cursor::new(cur.into_inner())).unwrap();
        assert_eq!(streamed, build_addition(&spec).unwrap());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = "vars 2 rows 1\nextra: 1*5 = 0\n";
        assert!(matches!(parse_native(Cursor::new(bad)), Err(Error::Parse { line: 2, .. })));
        assert!(parse_native(Cursor::new("rows 1\n")).is_err());
        assert!(parse_native(Cursor::new("vars 1 rows 2\n1*0 = 1\n")).is_err());
        let ok = "# comment\nvars 2 rows 1\n1/2*0 -1*1 = 3/4 # trailing\n";
        let sys = parse_native(Cursor::new(ok)).unwrap();
        assert_eq!(sys.constraints()[0].rhs, crate::lp::rational(3, 4));
    }

    #[test]
    fn lp_export_shape() {
        let sys = one_bit();
        let mut buf = Vec::new();
        write_lp(&sys, None, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("Subject To\n d0: 1 x0 = 0\n"));
        assert!(text.contains(" s2: 1 x2 - 1 x3 - 1 x4 = 0\n"));
        assert!(text.trim_end().ends_with("End"));
    }
}
