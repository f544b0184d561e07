//! SDPA sparse format (`.dat-s`) — the interchange contract with external
//! solvers. Layout: optional leading comment lines (`"` or `*`), then
//! number of constraints, number of blocks, block sizes (negative =
//! diagonal), the rhs vector, and one `matno blkno i j value` quintuple per
//! nonzero upper-triangular entry (`matno 0` is the objective, indices
//! 1-based). Emission is deterministic and byte-stable; `parse` is its exact
//! inverse.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use super::{SdpConstraint, SdpError, SdpProblem};

/// Render the problem as a `.dat-s` string. `comments` become leading `"`
/// lines (they must not contain newlines).
pub fn emit_sdpa_string(problem: &SdpProblem, comments: &[String]) -> Result<String, SdpError> {
    problem.validate()?;
    let mut out = String::new();
    for c in comments {
        assert!(!c.contains('\n'), "comment lines must be single lines");
        writeln!(out, "\"{c}").unwrap();
    }
    writeln!(out, "{}", problem.constraints.len()).unwrap();
    writeln!(out, "{}", problem.blocks.len()).unwrap();
    let sizes: Vec<String> = problem.blocks.iter().map(|s| s.to_string()).collect();
    writeln!(out, "{}", sizes.join(" ")).unwrap();
    let rhs: Vec<String> = problem.constraints.iter().map(|c| fmt_f64(c.rhs)).collect();
    writeln!(out, "{}", rhs.join(" ")).unwrap();

    let write_entries = |matno: usize, mats: &[DMatrix<f64>], out: &mut String| {
        for (blk, (m, &size)) in mats.iter().zip(&problem.blocks).enumerate() {
            let n = size.unsigned_abs() as usize;
            for i in 0..n {
                let j_range = if size < 0 { i..i + 1 } else { i..n };
                for j in j_range {
                    let v = m[(i, j)];
                    if v != 0.0 {
                        writeln!(out, "{matno} {} {} {} {}", blk + 1, i + 1, j + 1, fmt_f64(v))
                            .unwrap();
                    }
                }
            }
        }
    };
    write_entries(0, &problem.objective, &mut out);
    for (k, con) in problem.constraints.iter().enumerate() {
        write_entries(k + 1, &con.matrices, &mut out);
    }
    Ok(out)
}

/// `Display` for `f64` prints the shortest decimal that parses back to the
/// same bits — exact round-trips and stable bytes.
fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub fn emit_sdpa(
    problem: &SdpProblem,
    path: impl AsRef<Path>,
    comments: &[String],
) -> Result<(), SdpError> {
    let text = emit_sdpa_string(problem, comments)?;
    std::fs::write(path.as_ref(), text).map_err(|source| SdpError::Io {
        path: path.as_ref().display().to_string(),
        source,
    })
}

pub fn parse_sdpa(path: impl AsRef<Path>) -> Result<SdpProblem, SdpError> {
    let text = std::fs::read_to_string(path.as_ref()).map_err(|source| SdpError::Io {
        path: path.as_ref().display().to_string(),
        source,
    })?;
    parse_sdpa_str(&text, &path.as_ref().display().to_string())
}

/// Parse `.dat-s` text; `path` is used only in error messages.
pub fn parse_sdpa_str(text: &str, path: &str) -> Result<SdpProblem, SdpError> {
    let err = |line: usize, message: String| SdpError::Parse {
        path: path.to_string(),
        line,
        message,
    };
    // Numbered, non-comment, non-empty lines. SDPA allows `"` and `*`
    // comments at the top; we tolerate them anywhere before data lines.
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('"') && !l.starts_with('*'));

    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| err(0, format!("unexpected end of file, expected {what}")))
    };

    let (ln, l) = next("the constraint count")?;
    let ncons: usize = parse_first_token(l).map_err(|m| err(ln, m))?;
    let (ln, l) = next("the block count")?;
    let nblocks: usize = parse_first_token(l).map_err(|m| err(ln, m))?;

    let (ln, l) = next("the block sizes")?;
    let blocks: Vec<i32> = split_tokens(l)
        .map(|t| t.parse::<f64>().map(|v| v as i32).map_err(|e| err(ln, format!("bad block size {t:?}: {e}"))))
        .collect::<Result<_, _>>()?;
    if blocks.len() != nblocks {
        return Err(err(ln, format!("{} block sizes, header said {nblocks}", blocks.len())));
    }
    if blocks.iter().any(|&s| s == 0) {
        return Err(err(ln, "zero block size".into()));
    }

    let (ln, l) = next("the rhs vector")?;
    let rhs: Vec<f64> = split_tokens(l)
        .map(|t| t.parse::<f64>().map_err(|e| err(ln, format!("bad rhs {t:?}: {e}"))))
        .collect::<Result<_, _>>()?;
    if rhs.len() != ncons {
        return Err(err(ln, format!("{} rhs values, header said {ncons}", rhs.len())));
    }

    let zero_mats = || -> Vec<DMatrix<f64>> {
        blocks
            .iter()
            .map(|&s| {
                let n = s.unsigned_abs() as usize;
                DMatrix::zeros(n, n)
            })
            .collect()
    };
    let mut objective = zero_mats();
    let mut constraints: Vec<SdpConstraint> = rhs
        .into_iter()
        .map(|rhs| SdpConstraint { matrices: zero_mats(), rhs })
        .collect();

    for (ln, l) in lines {
        let toks: Vec<&str> = split_tokens(l).collect();
        if toks.len() != 5 {
            return Err(err(ln, format!("expected 5 fields, got {}", toks.len())));
        }
        let matno: usize = toks[0].parse().map_err(|e| err(ln, format!("bad matno: {e}")))?;
        let blkno: usize = toks[1].parse().map_err(|e| err(ln, format!("bad blkno: {e}")))?;
        let i: usize = toks[2].parse().map_err(|e| err(ln, format!("bad row: {e}")))?;
        let j: usize = toks[3].parse().map_err(|e| err(ln, format!("bad col: {e}")))?;
        let value: f64 = toks[4].parse().map_err(|e| err(ln, format!("bad value: {e}")))?;
        if matno > ncons {
            return Err(err(ln, format!("matno {matno} out of range 0..={ncons}")));
        }
        if blkno == 0 || blkno > nblocks {
            return Err(err(ln, format!("blkno {blkno} out of range 1..={nblocks}")));
        }
        let size = blocks[blkno - 1];
        let n = size.unsigned_abs() as usize;
        if i == 0 || j == 0 || i > n || j > n {
            return Err(err(ln, format!("index ({i},{j}) out of range for block size {n}")));
        }
        if i > j {
            return Err(err(ln, format!("lower-triangular entry ({i},{j})")));
        }
        if size < 0 && i != j {
            return Err(err(ln, format!("off-diagonal entry ({i},{j}) in diagonal block")));
        }
        let mats = if matno == 0 {
            &mut objective
        } else {
            &mut constraints[matno - 1].matrices
        };
        let m = &mut mats[blkno - 1];
        m[(i - 1, j - 1)] = value;
        m[(j - 1, i - 1)] = value;
    }

    SdpProblem::new(blocks, objective, constraints)
}

fn split_tokens(l: &str) -> impl Iterator<Item = &str> {
    // Block-structure lines are allowed to carry {}, (), and commas.
    l.split(|c: char| c.is_whitespace() || c == ',' || c == '{' || c == '}' || c == '(' || c == ')')
        .filter(|t| !t.is_empty())
}

fn parse_first_token<T: std::str::FromStr>(l: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    let tok = split_tokens(l).next().ok_or("empty line")?;
    tok.parse::<T>().map_err(|e| format!("bad value {tok:?}: {e}"))
}
