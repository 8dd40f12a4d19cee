//! Fixed-format MPS writer and a whitespace-tolerant reader.
//!
//! The objective constant is written as the right-hand side of the
//! objective row with its sign negated, following the common convention.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::{MilpError, MilpModel, Origin, Sense, VarKind, VarTag};

const OBJ_ROW: &str = "OBJ";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MpsError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Model(#[from] MilpError),
}

fn field_line(out: &mut String, code: &str, a: &str, b: &str, value: Option<f64>) {
    let _ = write!(out, " {code:<2} {a:<8}  {b:<8}");
    if let Some(v) = value {
        let _ = write!(out, "  {:>12}", fmt_num(v));
    }
    let trimmed = out.trim_end_matches(' ').len();
    out.truncate(trimmed);
    out.push('\n');
}

fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

/// Writes the model as fixed-format MPS. Names longer than eight characters
/// widen their field, so the result is also valid free-format MPS.
pub fn export_mps(model: &MilpModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME          {}", model.name);
    out.push_str("ROWS\n");
    field_line(&mut out, "N", OBJ_ROW, "", None);
    for c in model.constraints() {
        let code = match c.sense {
            Sense::Le => "L",
            Sense::Ge => "G",
            Sense::Eq => "E",
        };
        field_line(&mut out, code, &c.name, "", None);
    }

    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.num_vars()];
    for (i, c) in model.constraints().iter().enumerate() {
        for &(a, j) in &c.terms {
            columns[j].push((i, a));
        }
    }
    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut markers = 0;
    for (j, v) in model.variables().iter().enumerate() {
        let int = v.kind.is_integral();
        if int != in_int {
            let tag = if int { "'INTORG'" } else { "'INTEND'" };
            let _ = writeln!(
                out,
                "    MARKER{markers:<6}      'MARKER'                 {tag}"
            );
            if !int {
                markers += 1;
            }
            in_int = int;
        }
        let obj = model.objective()[j];
        if obj != 0.0 || columns[j].is_empty() {
            field_line(&mut out, "", &v.name, OBJ_ROW, Some(obj));
        }
        for &(i, a) in &columns[j] {
            field_line(&mut out, "", &v.name, &model.constraints()[i].name, Some(a));
        }
    }
    if in_int {
        let _ = writeln!(
            out,
            "    MARKER{markers:<6}      'MARKER'                 'INTEND'"
        );
    }

    out.push_str("RHS\n");
    if model.objective_constant() != 0.0 {
        field_line(
            &mut out,
            "",
            "RHS",
            OBJ_ROW,
            Some(-model.objective_constant()),
        );
    }
    for c in model.constraints() {
        if c.rhs != 0.0 {
            field_line(&mut out, "", "RHS", &c.name, Some(c.rhs));
        }
    }

    out.push_str("BOUNDS\n");
    for v in model.variables() {
        let (lo, up) = (v.lower, v.upper);
        if lo == up {
            field_line(&mut out, "FX", "BND", &v.name, Some(lo));
            continue;
        }
        if lo == f64::NEG_INFINITY && up == f64::INFINITY {
            field_line(&mut out, "FR", "BND", &v.name, None);
            continue;
        }
        if lo == f64::NEG_INFINITY {
            field_line(&mut out, "MI", "BND", &v.name, None);
        } else if lo != 0.0 || v.kind.is_integral() {
            field_line(&mut out, "LO", "BND", &v.name, Some(lo));
        }
        if up == f64::INFINITY {
            if v.kind.is_integral() {
                field_line(&mut out, "PL", "BND", &v.name, None);
            }
        } else {
            field_line(&mut out, "UP", "BND", &v.name, Some(up));
        }
    }
    out.push_str("ENDATA\n");
    out
}

#[derive(PartialEq, Clone, Copy)]
enum Section {
    None,
    Rows,
    Columns,
    Rhs,
    Bounds,
    End,
}

/// Reads an MPS model. Variables get the `Generic` tag and constraints the
/// `Imported` origin. Integer variables with bounds `[0, 1]` become binary.
pub fn parse_mps(text: &str) -> Result<MilpModel, MpsError> {
    let mut model = MilpModel::new("", "");
    let mut section = Section::None;
    let mut obj_row: Option<String> = None;
    let mut rows: Vec<(String, Sense)> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut row_terms: Vec<Vec<(f64, usize)>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut obj_constant = 0.0;
    let mut vars: Vec<(String, bool)> = Vec::new();
    let mut var_index: HashMap<String, usize> = HashMap::new();
    let mut obj: Vec<f64> = Vec::new();
    let mut bounds: Vec<(f64, f64)> = Vec::new();
    let mut integer = false;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| MpsError::Syntax { line, message };
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if !raw.starts_with(' ') && !raw.starts_with('\t') {
            section = match fields[0] {
                "NAME" => {
                    model.name = fields.get(1).unwrap_or(&"").to_string();
                    Section::None
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                other => return Err(err(format!("unsupported section `{other}`"))),
            };
            continue;
        }
        let number = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| err(format!("`{s}` is not a number")))
        };
        match section {
            Section::Rows => {
                if fields.len() != 2 {
                    return Err(err("row entry needs a type and a name".into()));
                }
                let sense = match fields[0] {
                    "N" => {
                        if obj_row.is_none() {
                            obj_row = Some(fields[1].to_string());
                        }
                        continue;
                    }
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    "E" => Sense::Eq,
                    other => return Err(err(format!("unknown row type `{other}`"))),
                };
                row_index.insert(fields[1].to_string(), rows.len());
                rows.push((fields[1].to_string(), sense));
                row_terms.push(Vec::new());
                rhs.push(0.0);
            }
            Section::Columns => {
                if fields.len() >= 3 && fields[1] == "'MARKER'" {
                    integer = match fields[2] {
                        "'INTORG'" => true,
                        "'INTEND'" => false,
                        other => return Err(err(format!("unknown marker `{other}`"))),
                    };
                    continue;
                }
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(err("column entry needs 3 or 5 fields".into()));
                }
                let j = match var_index.get(fields[0]) {
                    Some(&j) => j,
                    None => {
                        let j = vars.len();
                        var_index.insert(fields[0].to_string(), j);
                        vars.push((fields[0].to_string(), integer));
                        obj.push(0.0);
                        bounds.push((0.0, if integer { 1.0 } else { f64::INFINITY }));
                        j
                    }
                };
                for pair in fields[1..].chunks(2) {
                    let a = number(pair[1])?;
                    if Some(pair[0]) == obj_row.as_deref() {
                        obj[j] += a;
                    } else {
                        let r = *row_index
                            .get(pair[0])
                            .ok_or_else(|| err(format!("unknown row `{}`", pair[0])))?;
                        row_terms[r].push((a, j));
                    }
                }
            }
            Section::Rhs => {
                let pairs = if fields.len() % 2 == 1 {
                    &fields[1..]
                } else {
                    &fields[..]
                };
                for pair in pairs.chunks(2) {
                    if pair.len() != 2 {
                        return Err(err("RHS entry needs a row and a value".into()));
                    }
                    let v = number(pair[1])?;
                    if Some(pair[0]) == obj_row.as_deref() {
                        obj_constant = -v;
                    } else {
                        let r = *row_index
                            .get(pair[0])
                            .ok_or_else(|| err(format!("unknown row `{}`", pair[0])))?;
                        rhs[r] = v;
                    }
                }
            }
            Section::Bounds => {
                if fields.len() < 3 {
                    return Err(err("bound entry too short".into()));
                }
                let j = *var_index
                    .get(fields[2])
                    .ok_or_else(|| err(format!("unknown column `{}`", fields[2])))?;
                let value = fields.get(3).map(|s| number(s)).transpose()?;
                let need =
                    || value.ok_or_else(|| err(format!("bound `{}` needs a value", fields[0])));
                let b = &mut bounds[j];
                match fields[0] {
                    "UP" => b.1 = need()?,
                    "LO" => b.0 = need()?,
                    "FX" => {
                        let v = need()?;
                        *b = (v, v);
                    }
                    "BV" => {
                        *b = (0.0, 1.0);
                        vars[j].1 = true;
                    }
                    "MI" => b.0 = f64::NEG_INFINITY,
                    "PL" => b.1 = f64::INFINITY,
                    "FR" => *b = (f64::NEG_INFINITY, f64::INFINITY),
                    other => return Err(err(format!("unsupported bound type `{other}`"))),
                }
            }
            Section::None | Section::End => {
                return Err(err("data outside of a section".into()));
            }
        }
    }
    if section != Section::End {
        return Err(MpsError::Syntax {
            line: text.lines().count() + 1,
            message: "missing ENDATA".into(),
        });
    }

    let mut ids = Vec::with_capacity(vars.len());
    for (j, (name, int)) in vars.iter().enumerate() {
        let (lo, up) = bounds[j];
        let kind = match (*int, lo, up) {
            (true, l, u) if l >= 0.0 && u <= 1.0 => VarKind::Binary,
            (true, ..) => VarKind::Integer,
            _ => VarKind::Continuous,
        };
        ids.push(model.add_variable(name.clone(), kind, lo, up, VarTag::Generic)?);
    }
    for (r, (name, sense)) in rows.into_iter().enumerate() {
        let terms: Vec<_> = row_terms[r].iter().map(|&(a, j)| (a, ids[j])).collect();
        model.add_constraint(name, terms, sense, rhs[r], Origin::Imported)?;
    }
    model.set_objective(obj.iter().zip(&ids).map(|(&a, &v)| (a, v)), obj_constant)?;
    Ok(model)
}
