//! Plain-text problem dump.
//!
//! ```text
//! fedualex-problem 1
//! kind l1
//! lambda 1e-1
//! radius 5e-2
//! matrix a 2 3
//! <row 0: 3 entries>
//! <row 1: 3 entries>
//! matrix b 2 1
//! ...
//! ```
//!
//! Blocks are `a`, `b` for the bilinear kinds and `c` for the quadratic one.
//! Entries use the shortest exact decimal form, so a dump read back is
//! bitwise identical.

use std::fmt::Write as _;

use super::{BilinearL1Problem, BilinearNuclearProblem, ProblemInstance, ProblemKind, QuadraticL1Problem};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

const MAGIC: &str = "fedualex-problem";
const VERSION: u32 = 1;

pub fn write_problem<T: Scalar>(problem: &ProblemInstance<T>) -> String {
    let mut out = String::new();
    let (kind, lambda, radius, blocks): (_, _, _, Vec<(&str, Matrix<T>)>) = match problem {
        ProblemInstance::L1(p) => (
            ProblemKind::L1,
            p.lambda,
            p.radius,
            vec![("a", p.a.clone()), ("b", p.b.clone())],
        ),
        ProblemInstance::Nuclear(p) => (
            ProblemKind::Nuclear,
            p.lambda,
            p.radius,
            vec![("a", p.a.clone()), ("b", p.b.clone())],
        ),
        ProblemInstance::Quadratic(p) => (
            ProblemKind::Quadratic,
            p.lambda,
            p.radius,
            vec![("c", Matrix::column(p.c.clone()))],
        ),
    };
    let _ = writeln!(out, "{MAGIC} {VERSION}");
    let _ = writeln!(out, "kind {kind}");
    let _ = writeln!(out, "lambda {lambda:e}");
    let _ = writeln!(out, "radius {radius:e}");
    for (name, m) in blocks {
        let _ = writeln!(out, "matrix {name} {} {}", m.rows(), m.cols());
        for i in 0..m.rows() {
            let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:e}")).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        for (i, line) in self.inner.by_ref() {
            let line = line.trim();
            if !line.is_empty() && !line.starts_with('#') {
                return Ok((i + 1, line));
            }
        }
        Err(parse_error(0, format!("unexpected end of input, expected {what}")))
    }

    fn field(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (no, line) = self.next(key)?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok((no, v.trim())),
            _ => Err(parse_error(no, format!("expected `{key} <value>`"))),
        }
    }
}

fn parse_error(line: usize, reason: impl std::fmt::Display) -> Error {
    Error::invalid("read_problem", format!("line {line}: {reason}"))
}

fn number<T: Scalar>(no: usize, s: &str) -> Result<T> {
    T::from_str_radix(s, 10).map_err(|_| parse_error(no, format!("bad number `{s}`")))
}

fn read_matrix<T: Scalar>(lines: &mut Lines<'_>, name: &str) -> Result<Matrix<T>> {
    let (no, header) = lines.next("matrix header")?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    let (rows, cols) = match parts.as_slice() {
        ["matrix", n, r, c] if *n == name => (
            r.parse::<usize>().map_err(|_| parse_error(no, "bad row count"))?,
            c.parse::<usize>().map_err(|_| parse_error(no, "bad column count"))?,
        ),
        _ => return Err(parse_error(no, format!("expected `matrix {name} <rows> <cols>`"))),
    };
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let (no, line) = lines.next("matrix row")?;
        let before = data.len();
        for tok in line.split_whitespace() {
            data.push(number(no, tok)?);
        }
        if data.len() - before != cols {
            return Err(parse_error(
                no,
                format!("expected {cols} entries, found {}", data.len() - before),
            ));
        }
    }
    Matrix::from_row_major(rows, cols, data)
}

pub fn read_problem<T: Scalar>(text: &str) -> Result<ProblemInstance<T>> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (no, version) = lines.field(MAGIC)?;
    if version != VERSION.to_string() {
        return Err(parse_error(no, format!("unsupported version `{version}`")));
    }
    let (no, kind) = lines.field("kind")?;
    let kind: ProblemKind = kind
        .parse()
        .map_err(|_| parse_error(no, format!("unknown kind `{kind}`")))?;
    let (no, lambda) = lines.field("lambda")?;
    let lambda = number(no, lambda)?;
    let (no, radius) = lines.field("radius")?;
    let radius = number(no, radius)?;
    let problem = match kind {
        ProblemKind::L1 => {
            let a = read_matrix(&mut lines, "a")?;
            let b = read_matrix(&mut lines, "b")?;
            ProblemInstance::L1(BilinearL1Problem::new(a, b, lambda, radius)?)
        }
        ProblemKind::Nuclear => {
            let a = read_matrix(&mut lines, "a")?;
            let b = read_matrix(&mut lines, "b")?;
            ProblemInstance::Nuclear(BilinearNuclearProblem::new(a, b, lambda, radius)?)
        }
        ProblemKind::Quadratic => {
            let c: Matrix<T> = read_matrix(&mut lines, "c")?;
            if c.cols() != 1 {
                return Err(Error::dims(
                    "read_problem",
                    "column vector c",
                    format!("{}x{}", c.rows(), c.cols()),
                ));
            }
            ProblemInstance::Quadratic(QuadraticL1Problem::new(c.into_vec(), lambda, radius)?)
        }
    };
    if let Ok((no, _)) = lines.next("end") {
        return Err(parse_error(no, "trailing content"));
    }
    Ok(problem)
}
