//! Line-based problem text format.
//!
//! ```text
//! <n>
//! <d_1> <d_2> ... <d_n>
//! C <i> <j>            # one block per constraint, 1-based agents, i < j
//! <d_i lines of d_j costs>
//! ```
//!
//! Blank lines and lines starting with `#` are ignored on input.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::model::{Cost, CostTable, Problem};

pub fn write_problem<W: Write>(problem: &Problem, mut sink: W) -> Result<()> {
    writeln!(sink, "{}", problem.agent_count())?;
    let domains: Vec<String> = problem.domains().iter().map(usize::to_string).collect();
    writeln!(sink, "{}", domains.join(" "))?;
    for (i, j, table) in problem.constraints() {
        writeln!(sink, "C {} {}", i + 1, j + 1)?;
        for v in 0..table.rows() {
            let row: Vec<String> = table.row(v).iter().map(Cost::to_string).collect();
            writeln!(sink, "{}", row.join(" "))?;
        }
    }
    Ok(())
}

pub fn problem_to_string(problem: &Problem) -> String {
    let mut buf = Vec::new();
    write_problem(problem, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("format is ASCII")
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> Lines<R> {
    /// Next meaningful line, with its 1-based line number.
    fn next_line(&mut self) -> Result<Option<(usize, String)>> {
        for line in self.inner.by_ref() {
            self.line_no += 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            return Ok(Some((self.line_no, trimmed.to_string())));
        }
        Ok(None)
    }

    fn expect_line(&mut self, what: &str) -> Result<(usize, String)> {
        self.next_line()?.ok_or_else(|| Error::Parse {
            line: self.line_no + 1,
            message: format!("unexpected end of input, expected {what}"),
        })
    }
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse().map_err(|_| Error::Parse {
        line,
        message: format!("expected {what}, found {tok:?}"),
    })
}

pub fn read_problem<R: BufRead>(source: R) -> Result<Problem> {
    let mut lines = Lines {
        inner: source.lines(),
        line_no: 0,
    };
    let (line, header) = lines.expect_line("agent count")?;
    let n: usize = parse_num(&header, line, "agent count")?;

    let (line, dom_line) = lines.expect_line("domain sizes")?;
    let domains = dom_line
        .split_whitespace()
        .map(|t| parse_num::<usize>(t, line, "domain size"))
        .collect::<Result<Vec<_>>>()?;
    if domains.len() != n {
        return Err(Error::Parse {
            line,
            message: format!("expected {n} domain sizes, found {}", domains.len()),
        });
    }
    let mut problem = Problem::new(domains).map_err(|e| Error::Parse {
        line,
        message: e.to_string(),
    })?;

    while let Some((line, head)) = lines.next_line()? {
        let toks: Vec<&str> = head.split_whitespace().collect();
        if toks.len() != 3 || toks[0] != "C" {
            return Err(Error::Parse {
                line,
                message: format!("expected `C <i> <j>`, found {head:?}"),
            });
        }
        let i: usize = parse_num(toks[1], line, "agent number")?;
        let j: usize = parse_num(toks[2], line, "agent number")?;
        if i == 0 || j == 0 || i > n || j > n {
            return Err(Error::Parse {
                line,
                message: format!("agent numbers must be in 1..={n}"),
            });
        }
        let (i, j) = (i - 1, j - 1);
        let (rows, cols) = (problem.domain_size(i), problem.domain_size(j));
        let mut entries = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let (row_line, row) = lines.expect_line("cost table row")?;
            let before = entries.len();
            for tok in row.split_whitespace() {
                entries.push(parse_num::<Cost>(
                    tok,
                    row_line,
                    "non-negative integer cost",
                )?);
            }
            if entries.len() - before != cols {
                return Err(Error::Parse {
                    line: row_line,
                    message: format!("expected {cols} costs, found {}", entries.len() - before),
                });
            }
        }
        let table = CostTable::new(rows, cols, entries)?;
        problem
            .add_constraint(i, j, table)
            .map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
    }
    Ok(problem)
}

pub fn problem_from_str(text: &str) -> Result<Problem> {
    read_problem(text.as_bytes())
}
