//! Fixed-format MPS writer and a whitespace-tokenizing MPS reader.
//!
//! Written files use generated 8-character names (`C0000001`, `R0000001`) so
//! they fit the fixed columns; the original names and row tags are kept in
//! `*` comment lines that the reader picks up again. Numbers are printed with
//! the shortest representation that round-trips, which may be wider than the
//! classic 12-character field.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::MilpError;
use crate::problem::{Problem, Sense};

const OBJ_ROW: &str = "COST";

fn col_code(j: usize) -> String {
    format!("C{:07}", j + 1)
}

fn row_code(i: usize) -> String {
    format!("R{:07}", i + 1)
}

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn check_name(kind: &str, name: &str) -> Result<(), MilpError> {
    if name.is_empty() || name.chars().any(char::is_whitespace) {
        return Err(MilpError::MpsWrite(format!(
            "{kind} name {name:?} is empty or contains whitespace"
        )));
    }
    Ok(())
}

/// Serializes `problem` to MPS text.
pub fn write_mps(problem: &Problem) -> Result<String, MilpError> {
    problem.check()?;
    let mut p = problem.clone();
    p.compress();
    let mut out = String::new();
    let pname: String = if p.name.is_empty() { "PROBLEM".into() } else { p.name.clone() };
    check_name("problem", &pname)?;
    let _ = writeln!(out, "* problem {pname}");
    for (j, c) in p.cols.iter().enumerate() {
        check_name("column", &c.name)?;
        let _ = writeln!(out, "* col {} {}", col_code(j), c.name);
    }
    for (i, r) in p.rows.iter().enumerate() {
        check_name("row", &r.name)?;
        let tag = if r.tag.is_empty() { "-" } else { r.tag.as_str() };
        check_name("tag", tag)?;
        let _ = writeln!(out, "* row {} {} {}", row_code(i), tag, r.name);
    }
    let short: String = pname.chars().take(8).collect();
    let _ = writeln!(out, "NAME          {short}");
    let _ = writeln!(out, "ROWS");
    let _ = writeln!(out, " N  {OBJ_ROW}");
    for (i, r) in p.rows.iter().enumerate() {
        let s = match r.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        };
        let _ = writeln!(out, " {s}  {}", row_code(i));
    }
    let _ = writeln!(out, "COLUMNS");
    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); p.cols.len()];
    for &(r, c, v) in &p.triplets {
        by_col[c].push((r, v));
    }
    let mut in_int = false;
    let mut marker = 0usize;
    for (j, c) in p.cols.iter().enumerate() {
        if c.binary != in_int {
            let kind = if c.binary { "'INTORG'" } else { "'INTEND'" };
            let _ = writeln!(out, "    M{marker:07}  'MARKER'                 {kind}");
            marker += 1;
            in_int = c.binary;
        }
        let code = col_code(j);
        let mut entries: Vec<(String, f64)> = Vec::new();
        if c.cost != 0.0 {
            entries.push((OBJ_ROW.to_string(), c.cost));
        }
        let mut rows = std::mem::take(&mut by_col[j]);
        rows.sort_by_key(|e| e.0);
        entries.extend(rows.into_iter().map(|(r, v)| (row_code(r), v)));
        if entries.is_empty() {
            // keep the column visible to readers
            entries.push((OBJ_ROW.to_string(), 0.0));
        }
        for pair in entries.chunks(2) {
            let mut line = format!("    {code:<8}  {:<8}  {:>12}", pair[0].0, num(pair[0].1));
            if let Some(second) = pair.get(1) {
                let _ = write!(line, "   {:<8}  {:>12}", second.0, num(second.1));
            }
            let _ = writeln!(out, "{line}");
        }
    }
    if in_int {
        let _ = writeln!(out, "    M{marker:07}  'MARKER'                 'INTEND'");
    }
    let _ = writeln!(out, "RHS");
    for (i, r) in p.rows.iter().enumerate() {
        if r.rhs != 0.0 {
            let _ = writeln!(out, "    RHS       {:<8}  {:>12}", row_code(i), num(r.rhs));
        }
    }
    let _ = writeln!(out, "BOUNDS");
    for (j, c) in p.cols.iter().enumerate() {
        let code = col_code(j);
        if c.binary && c.lower == 0.0 && c.upper == 1.0 {
            let _ = writeln!(out, " BV BND       {code}");
            continue;
        }
        let (lo, hi) = (c.lower, c.upper);
        if lo == hi {
            let _ = writeln!(out, " FX BND       {code:<8}  {:>12}", num(lo));
        } else if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            let _ = writeln!(out, " FR BND       {code}");
        } else {
            if lo == f64::NEG_INFINITY {
                let _ = writeln!(out, " MI BND       {code}");
            } else if lo != 0.0 {
                let _ = writeln!(out, " LO BND       {code:<8}  {:>12}", num(lo));
            }
            if hi != f64::INFINITY {
                let _ = writeln!(out, " UP BND       {code:<8}  {:>12}", num(hi));
            } else if lo == f64::NEG_INFINITY {
                // MI alone leaves the upper bound at +inf
            }
        }
    }
    let _ = writeln!(out, "ENDATA");
    Ok(out)
}

pub fn write_mps_file(problem: &Problem, path: impl AsRef<Path>) -> Result<(), MilpError> {
    let text = write_mps(problem)?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

pub fn read_mps_file(path: impl AsRef<Path>) -> Result<Problem, MilpError> {
    let f = std::fs::File::open(path)?;
    read_mps(f)
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
}

fn parse_num(tok: &str, line: usize) -> Result<f64, MilpError> {
    let v: f64 = tok.parse().map_err(|_| MilpError::MpsParse {
        line,
        msg: format!("bad number {tok:?}"),
    })?;
    if !v.is_finite() && !(v.is_infinite() && tok.to_ascii_lowercase().contains("inf")) {
        return Err(MilpError::MpsParse {
            line,
            msg: format!("non-finite number {tok:?}"),
        });
    }
    Ok(v)
}

/// Parses MPS text. Fields are split on whitespace, so names must not
/// contain blanks. Integer columns must end up with bounds inside `[0, 1]`.
pub fn read_mps<R: Read>(reader: R) -> Result<Problem, MilpError> {
    let reader = BufReader::new(reader);
    let mut problem = Problem::new("");
    let mut section = Section::None;
    let mut obj_name: Option<String> = None;
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut int_cols: Vec<bool> = Vec::new();
    let mut bounded: Vec<bool> = Vec::new();
    let mut in_int = false;
    let mut ranges: Vec<(usize, f64)> = Vec::new();
    let mut comment_cols: HashMap<String, String> = HashMap::new();
    let mut comment_rows: HashMap<String, (String, String)> = HashMap::new();
    let mut comment_name: Option<String> = None;
    let mut ended = false;

    for (ln, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = ln + 1;
        let err = |msg: String| MilpError::MpsParse { line: lineno, msg };
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('*') {
            let t: Vec<&str> = rest.split_whitespace().collect();
            match t.as_slice() {
                ["problem", name] => comment_name = Some((*name).to_string()),
                ["col", code, name] => {
                    comment_cols.insert((*code).to_string(), (*name).to_string());
                }
                ["row", code, tag, name] => {
                    let tag = if *tag == "-" { String::new() } else { (*tag).to_string() };
                    comment_rows.insert((*code).to_string(), (tag, (*name).to_string()));
                }
                _ => {}
            }
            continue;
        }
        let is_header = !line.starts_with(' ') && !line.starts_with('\t');
        let tok: Vec<&str> = line.split_whitespace().collect();
        if is_header {
            match tok[0] {
                "NAME" => {
                    problem.name = tok.get(1).map(|s| s.to_string()).unwrap_or_default();
                    section = Section::None;
                }
                "ROWS" => section = Section::Rows,
                "COLUMNS" => section = Section::Columns,
                "RHS" => section = Section::Rhs,
                "RANGES" => section = Section::Ranges,
                "BOUNDS" => section = Section::Bounds,
                "ENDATA" => {
                    ended = true;
                    break;
                }
                "OBJSENSE" => {
                    if tok.get(1).is_some_and(|s| s.starts_with("MAX")) {
                        return Err(err("maximization is not supported".into()));
                    }
                    section = Section::None;
                }
                other => return Err(err(format!("unknown section {other}"))),
            }
            continue;
        }
        match section {
            Section::None => {
                if tok.first().is_some_and(|t| t.starts_with("MIN")) {
                    continue;
                }
                return Err(err("data line outside of a section".into()));
            }
            Section::Rows => {
                if tok.len() < 2 {
                    return Err(err("ROWS line needs a type and a name".into()));
                }
                let name = tok[1].to_string();
                let sense = match tok[0] {
                    "N" => {
                        if obj_name.is_none() {
                            obj_name = Some(name);
                        }
                        continue;
                    }
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    "E" => Sense::Eq,
                    t => return Err(err(format!("unknown row type {t}"))),
                };
                if row_index.contains_key(&name) {
                    return Err(err(format!("duplicate row {name}")));
                }
                let i = problem.add_row(name.clone(), "", &[], sense, 0.0);
                row_index.insert(name, i);
            }
            Section::Columns => {
                if tok.len() >= 3 && tok[1] == "'MARKER'" {
                    match tok[2] {
                        "'INTORG'" => in_int = true,
                        "'INTEND'" => in_int = false,
                        t => return Err(err(format!("unknown marker {t}"))),
                    }
                    continue;
                }
                if tok.len() != 3 && tok.len() != 5 {
                    return Err(err("COLUMNS line needs 3 or 5 fields".into()));
                }
                let cname = tok[0];
                let j = match col_index.get(cname) {
                    Some(&j) => j,
                    None => {
                        let j = problem.add_col(cname, 0.0, f64::INFINITY, 0.0);
                        col_index.insert(cname.to_string(), j);
                        int_cols.push(in_int);
                        bounded.push(false);
                        j
                    }
                };
                for pair in tok[1..].chunks(2) {
                    let v = parse_num(pair[1], lineno)?;
                    if Some(pair[0]) == obj_name.as_deref() {
                        problem.cols[j].cost += v;
                    } else if let Some(&i) = row_index.get(pair[0]) {
                        problem.triplets.push((i, j, v));
                    } else {
                        return Err(err(format!("unknown row {}", pair[0])));
                    }
                }
            }
            Section::Rhs | Section::Ranges => {
                let fields = if tok.len() % 2 == 1 { &tok[1..] } else { &tok[..] };
                if fields.is_empty() || fields.len() % 2 != 0 {
                    return Err(err("malformed RHS/RANGES line".into()));
                }
                for pair in fields.chunks(2) {
                    let v = parse_num(pair[1], lineno)?;
                    if Some(pair[0]) == obj_name.as_deref() {
                        // objective constants are ignored
                        continue;
                    }
                    let &i = row_index
                        .get(pair[0])
                        .ok_or_else(|| err(format!("unknown row {}", pair[0])))?;
                    if section == Section::Rhs {
                        problem.rows[i].rhs = v;
                    } else {
                        ranges.push((i, v));
                    }
                }
            }
            Section::Bounds => {
                let kind = tok[0];
                let needs_value = !matches!(kind, "FR" | "MI" | "PL" | "BV");
                // the bound set name is optional
                let named = tok.len() == if needs_value { 4 } else { 3 };
                let base = if named { 2 } else { 1 };
                let (cname, value) = match (needs_value, tok.get(base), tok.get(base + 1)) {
                    (true, Some(c), Some(v)) => (*c, Some(parse_num(v, lineno)?)),
                    (false, Some(c), _) => (*c, None),
                    _ => return Err(err(format!("malformed {kind} bound"))),
                };
                let &j = col_index
                    .get(cname)
                    .ok_or_else(|| err(format!("unknown column {cname}")))?;
                bounded[j] = true;
                let c = &mut problem.cols[j];
                match (kind, value) {
                    ("UP", Some(v)) | ("UI", Some(v)) => {
                        c.upper = v;
                        if v < 0.0 && c.lower == 0.0 {
                            c.lower = f64::NEG_INFINITY;
                        }
                    }
                    ("LO", Some(v)) | ("LI", Some(v)) => c.lower = v,
                    ("FX", Some(v)) => {
                        c.lower = v;
                        c.upper = v;
                    }
                    ("FR", None) => {
                        c.lower = f64::NEG_INFINITY;
                        c.upper = f64::INFINITY;
                    }
                    ("MI", None) => c.lower = f64::NEG_INFINITY,
                    ("PL", None) => c.upper = f64::INFINITY,
                    ("BV", None) => {
                        c.lower = 0.0;
                        c.upper = 1.0;
                        int_cols[j] = true;
                    }
                    _ => return Err(err(format!("unknown bound type {kind}"))),
                }
                if matches!(kind, "UI" | "LI") {
                    int_cols[j] = true;
                }
            }
        }
    }
    if !ended {
        return Err(MilpError::MpsParse {
            line: 0,
            msg: "missing ENDATA".into(),
        });
    }

    for (j, c) in problem.cols.iter_mut().enumerate() {
        if int_cols[j] {
            if !bounded[j] {
                c.upper = 1.0;
            }
            if c.lower < 0.0 || c.upper > 1.0 {
                return Err(MilpError::MpsParse {
                    line: 0,
                    msg: format!("integer column {} is not binary", c.name),
                });
            }
            c.binary = true;
        }
    }

    // ranged rows become a pair of one-sided rows
    for (i, r) in ranges {
        let row = problem.rows[i].clone();
        let (lo, hi) = match row.sense {
            Sense::Le => (row.rhs - r.abs(), row.rhs),
            Sense::Ge => (row.rhs, row.rhs + r.abs()),
            Sense::Eq if r >= 0.0 => (row.rhs, row.rhs + r),
            Sense::Eq => (row.rhs + r, row.rhs),
        };
        problem.rows[i].sense = Sense::Ge;
        problem.rows[i].rhs = lo;
        let terms: Vec<(usize, f64)> = problem
            .triplets
            .iter()
            .filter(|t| t.0 == i)
            .map(|t| (t.1, t.2))
            .collect();
        problem.add_row(format!("{}_R", row.name), row.tag.clone(), &terms, Sense::Le, hi);
    }

    // restore names recorded by the writer
    if !comment_cols.is_empty() || !comment_rows.is_empty() {
        for c in problem.cols.iter_mut() {
            if let Some(n) = comment_cols.get(&c.name) {
                c.name = n.clone();
            }
        }
        for r in problem.rows.iter_mut() {
            if let Some((tag, n)) = comment_rows.get(&r.name) {
                r.name = n.clone();
                r.tag = tag.clone();
            }
        }
        if let Some(n) = comment_name {
            problem.name = n;
        }
    }
    problem.check()?;
    Ok(problem)
}
