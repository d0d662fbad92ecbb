//! Writer for the CPLEX LP text format.

use std::fmt::Write;

use crate::model::MilpModel;

const MAX_LINE: usize = 200;

/// Formats `v` with 12 significant digits, like C's `%.12g`.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "+inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.11e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{:.*}", decimals, v);
        trim_zeros(&s)
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp)
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn var_name(model: &MilpModel, j: usize) -> String {
    let name = &model.names()[j];
    if name.is_empty() {
        format!("v{j}")
    } else {
        name.clone()
    }
}

/// Appends `terms` to `out` after `head`, wrapping long lines.
fn write_terms(out: &mut String, head: &str, terms: &[String], tail: &str) {
    let mut line = String::from(head);
    for t in terms {
        if line.len() + t.len() + 1 > MAX_LINE {
            out.push_str(&line);
            out.push('\n');
            line = String::from("   ");
        }
        line.push(' ');
        line.push_str(t);
    }
    if !tail.is_empty() {
        if line.len() + tail.len() + 1 > MAX_LINE {
            out.push_str(&line);
            out.push('\n');
            line = String::from("   ");
        }
        line.push(' ');
        line.push_str(tail);
    }
    out.push_str(&line);
    out.push('\n');
}

fn linear_terms<'a>(model: &MilpModel, coeffs: impl Iterator<Item = (usize, f64)> + 'a) -> Vec<String> {
    let mut terms = Vec::new();
    for (j, a) in coeffs {
        if a == 0.0 {
            continue;
        }
        let name = var_name(model, j);
        let sign = if a < 0.0 { "-" } else { "+" };
        let mag = a.abs();
        let body = if mag == 1.0 { name } else { format!("{} {}", format_number(mag), name) };
        if terms.is_empty() && sign == "+" {
            terms.push(body);
        } else {
            terms.push(format!("{sign} {body}"));
        }
    }
    terms
}

/// Renders the model in CPLEX LP format (UTF-8, LF line endings).
pub fn export_lp(model: &MilpModel) -> String {
    let mut out = String::new();
    out.push_str("\\ written by shiftplan-milp\n");
    out.push_str("Maximize\n");
    let obj = linear_terms(model, model.objective().iter().copied().enumerate());
    write_terms(&mut out, " obj:", &obj, "");

    out.push_str("Subject To\n");
    for (i, row) in model.rows().iter().enumerate() {
        let name = if row.name.is_empty() { format!("c{i}") } else { row.name.clone() };
        let mut terms = linear_terms(model, row.coeffs.iter().map(|&(v, a)| (v.0, a)));
        if terms.is_empty() {
            // The format has no empty rows; a zero multiple keeps the row.
            if model.n_vars() > 0 {
                terms.push(format!("0 {}", var_name(model, 0)));
            } else {
                continue;
            }
        }
        let tail = format!("{} {}", row.sense.symbol(), format_number(row.rhs));
        write_terms(&mut out, &format!(" {name}:"), &terms, &tail);
    }

    out.push_str("Bounds\n");
    for j in 0..model.n_vars() {
        let (lo, hi) = (model.lower()[j], model.upper()[j]);
        let name = var_name(model, j);
        let line = match (lo.is_finite(), hi.is_finite()) {
            (false, false) => format!(" {name} free"),
            (true, false) => format!(" {name} >= {}", format_number(lo)),
            (false, true) => format!(" -inf <= {name} <= {}", format_number(hi)),
            (true, true) if lo == hi => format!(" {name} = {}", format_number(lo)),
            (true, true) => format!(" {} <= {name} <= {}", format_number(lo), format_number(hi)),
        };
        let _ = writeln!(out, "{line}");
    }

    out.push_str("Generals\n");
    let generals: Vec<String> =
        (0..model.n_vars()).filter(|&j| model.integrality()[j]).map(|j| var_name(model, j)).collect();
    if !generals.is_empty() {
        write_terms(&mut out, "", &generals, "");
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Sense;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(-2.5), "-2.5");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(0.632120558828557), "0.632120558829");
        assert_eq!(format_number(123456789012345.0), "1.23456789012e14");
        assert_eq!(format_number(1.5e-9), "1.5e-9");
        assert_eq!(format_number(50.0), "50");
    }

    #[test]
    fn empty_model_has_all_sections() {
        let text = export_lp(&MilpModel::new());
        for section in ["Maximize", "Subject To", "Bounds", "Generals", "End"] {
            assert!(text.contains(section), "{section} missing in\n{text}");
        }
        assert!(!text.contains('\r'));
    }

    #[test]
    fn integer_variable_listed_in_generals() {
        let mut m = MilpModel::new();
        let x = m.add_var("x_1", 0.0, 4.0, 1.0, true);
        m.add_row("cap", vec![(x, 2.0)], Sense::Le, 3.0);
        let text = export_lp(&m);
        let generals = text.split("Generals\n").nth(1).unwrap();
        assert!(generals.starts_with(" x_1\n"), "{text}");
        assert!(text.contains(" cap: 2 x_1 <= 3\n"), "{text}");
        assert!(text.contains(" 0 <= x_1 <= 4\n"), "{text}");
    }

    #[test]
    fn long_rows_wrap() {
        let mut m = MilpModel::new();
        let vars: Vec<_> = (0..200).map(|k| m.add_var(format!("x_{k}"), 0.0, 1.0, 1.0, false)).collect();
        m.add_row("sum", vars.iter().map(|&v| (v, 1.0)).collect(), Sense::Eq, 50.0);
        let text = export_lp(&m);
        assert!(text.lines().all(|l| l.len() <= MAX_LINE + 20));
        assert!(text.contains("= 50"));
    }
}
