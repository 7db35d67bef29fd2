//! Input/output specifications and the combined spec-file format.
//!
//! A spec file holds an input section after `@in` and an output section after
//! `@out`; a missing section means "no constraint". Input variables are
//! `x1..xd`, output variables `y1..ym`, numbered like the network coordinates.
//! BV files also carry a `width <l>` line before the sections and may
//! redeclare variable names per section with `vars <names...>`.

pub mod bv;
pub mod lp;
mod simplex;

use std::fmt::Write as _;

pub use bv::{BvAssignment, BvFormula, BvSpec, BvTerm, Nnf};
pub use lp::{parse_lp, parse_lp_over, Constraint, LinearProgram, Relation};

use crate::error::{Error, Result};

struct Sections {
    header: String,
    input: String,
    output: String,
}

/// Splits on the section markers, blanking lines that belong elsewhere so
/// parse errors keep file line numbers.
fn split_sections(text: &str) -> Result<Sections> {
    let (mut header, mut input, mut output) = (String::new(), String::new(), String::new());
    let mut current = 0;
    let mut seen = [false; 2];
    for (n, line) in text.lines().enumerate() {
        let trimmed = line.split('#').next().unwrap_or("").trim();
        let next = match trimmed {
            "@in" => Some(1),
            "@out" => Some(2),
            _ => None,
        };
        if let Some(s) = next {
            if seen[s - 1] {
                return Err(Error::syntax(n + 1, 1, format!("duplicate section `{trimmed}`")));
            }
            seen[s - 1] = true;
            current = s;
        }
        for (i, buf) in [&mut header, &mut input, &mut output].into_iter().enumerate() {
            if i == current && next.is_none() {
                buf.push_str(line);
            }
            buf.push('\n');
        }
    }
    Ok(Sections { header, input, output })
}

fn header_lines(header: &str) -> impl Iterator<Item = (usize, &str)> {
    crate::network::content_lines(header)
}

/// Parses an LP spec file for a network with the given dimensions.
pub fn parse_lp_spec(text: &str, in_dim: usize, out_dim: usize) -> Result<(LinearProgram, LinearProgram)> {
    let s = split_sections(text)?;
    for (n, line) in header_lines(&s.header) {
        if line != "format=1" {
            return Err(Error::syntax(n, 1, "expected `format=1`, `@in` or `@out`"));
        }
    }
    Ok((
        parse_lp_over(&s.input, "x", in_dim)?,
        parse_lp_over(&s.output, "y", out_dim)?,
    ))
}

pub fn format_lp_spec(input: &LinearProgram, output: &LinearProgram) -> String {
    format!("format=1\n@in\n{input}@out\n{output}")
}

fn bv_section(text: &str, width: usize, prefix: &str, dim: usize) -> Result<BvSpec> {
    let mut vars: Vec<String> = (1..=dim).map(|i| format!("{prefix}{i}")).collect();
    let mut body = String::new();
    for (n, line) in text.lines().enumerate() {
        let trimmed = line.split('#').next().unwrap_or("").trim();
        if let Some(rest) = trimmed.strip_prefix("vars ") {
            let declared: Vec<String> = rest.split_whitespace().map(String::from).collect();
            if declared.len() != dim {
                return Err(Error::syntax(
                    n + 1,
                    1,
                    format!("expected {dim} variable names, found {}", declared.len()),
                ));
            }
            vars = declared;
            body.push('\n');
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    BvSpec::parse(&body, width, &vars)
}

/// Parses a BV spec file. Each coordinate is one variable of `width` bits.
pub fn parse_bv_spec(text: &str, in_dim: usize, out_dim: usize) -> Result<(BvSpec, BvSpec)> {
    let s = split_sections(text)?;
    let mut width = None;
    for (n, line) in header_lines(&s.header) {
        if line == "format=1" {
            continue;
        }
        match line.strip_prefix("width ").map(|w| w.trim().parse::<usize>()) {
            Some(Ok(w)) if (1..=bv::MAX_WIDTH).contains(&w) => width = Some(w),
            Some(_) => return Err(Error::syntax(n, 7, "width must be an integer in 1..=128")),
            None => return Err(Error::syntax(n, 1, "expected `format=1`, `width <l>`, `@in` or `@out`")),
        }
    }
    let width = width.ok_or_else(|| Error::syntax(1, 1, "missing `width <l>` line"))?;
    Ok((
        bv_section(&s.input, width, "x", in_dim)?,
        bv_section(&s.output, width, "y", out_dim)?,
    ))
}

pub fn format_bv_spec(input: &BvSpec, output: &BvSpec) -> String {
    let mut out = format!("format=1\nwidth {}\n", input.width());
    for (marker, spec) in [("@in", input), ("@out", output)] {
        let _ = writeln!(out, "{marker}\nvars {}\n{spec}", spec.vars().join(" "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::int;

    #[test]
    fn lp_sections() {
        let text = "format=1\n@in\nx1 >= 0 /\\ x1 <= 1\nx2 = 0\n@out\ny1 = 1\n";
        let (l1, l2) = parse_lp_spec(text, 2, 1).unwrap();
        assert_eq!(l1.constraints().len(), 3);
        assert!(l2.check(&[int(1)]).unwrap());
        let again = parse_lp_spec(&format_lp_spec(&l1, &l2), 2, 1).unwrap();
        assert_eq!(again, (l1, l2));
        let err = parse_lp_spec("@in\nx1 >= 0\n@out\nx1 = 1\n", 1, 1).unwrap_err();
        assert!(matches!(err, Error::Syntax { location, .. } if location.line == 4));
        let (l1, l2) = parse_lp_spec("@out\ny2 >= 0\n", 1, 2).unwrap();
        assert!(l1.constraints().is_empty() && l2.constraints().len() == 1);
        assert!(parse_lp_spec("@in\n@in\n", 1, 1).is_err());
    }

    #[test]
    fn bv_sections() {
        let text = "format=1\nwidth 4\n@in\nx1 = 0b0011\n@out\nvars out\nout != 0\n";
        let (p1, p2) = parse_bv_spec(text, 1, 1).unwrap();
        assert!(p1.eval_words(&[3]) && !p1.eval_words(&[2]));
        assert_eq!(p2.vars(), ["out".to_string()]);
        let again = parse_bv_spec(&format_bv_spec(&p1, &p2), 1, 1).unwrap();
        assert_eq!(again, (p1, p2));
        assert!(parse_bv_spec("@in\nx1 = 0\n", 1, 1).is_err());
        assert!(parse_bv_spec("width 2\n@in\nx1 = 4\n", 1, 1).is_err());
        let (p1, _) = parse_bv_spec("width 2\n", 2, 1).unwrap();
        assert!(p1.eval_words(&[0, 1]));
    }
}
