//! Gnuplot scripts that read the emitted CSV files. Each script renders to a
//! terminal of the user's choosing; nothing here draws.

use std::fmt::Write as _;

use dicke_core::scaling::ScalingFit;

const PREAMBLE: &str = "set datafile separator ','\nset key outside right\nset grid\n";

fn curves(scans: &[(u32, String)], using: &str) -> String {
    let parts: Vec<String> = scans
        .iter()
        .map(|(n, file)| format!("'{file}' using {using} every ::1 with lines title 'N = {n}'"))
        .collect();
    format!("plot {}\n", parts.join(", \\\n     "))
}

/// Fidelity, susceptibility and truncation precision against the coupling.
pub fn scan_scripts(scans: &[(u32, String)]) -> Vec<(String, String)> {
    let mut out = Vec::new();
    out.push((
        "fidelity.gp".to_string(),
        format!(
            "{PREAMBLE}set title 'Fidelity'\nset xlabel 'gamma'\nset ylabel 'F'\n{}",
            curves(scans, "1:2")
        ),
    ));
    out.push((
        "susceptibility.gp".to_string(),
        format!(
            "{PREAMBLE}set title 'Fidelity susceptibility'\nset xlabel 'gamma'\nset ylabel 'chi_F'\n{}",
            curves(scans, "1:3")
        ),
    ));
    out.push((
        "delta_p.gp".to_string(),
        format!(
            "{PREAMBLE}set title 'Truncation precision'\nset xlabel 'gamma'\nset ylabel 'Delta P'\nset logscale y\n{}",
            curves(scans, "1:4")
        ),
    ));
    out
}

fn line(fit: &ScalingFit, x: &str) -> String {
    let c = &fit.coefficients;
    let mut s = format!("{:.10e}", c[0]);
    for (k, ck) in c.iter().enumerate().skip(1) {
        let _ = write!(s, " + ({ck:.10e})*{x}");
        if k > 1 {
            let _ = write!(s, "**{k}");
        }
    }
    s
}

/// Critical-point scaling plots from `critical_points.csv`.
pub fn exponent_scripts(
    criticals_csv: &str,
    gamma_c: f64,
    gamma_fit: Option<&ScalingFit>,
    fmin_fit: Option<&ScalingFit>,
    chi_fit: Option<&ScalingFit>,
) -> Vec<(String, String)> {
    let fitted = |fit: Option<&ScalingFit>, x: &str| match fit {
        Some(f) => format!(", \\\n     {} with lines lc rgb 'red' title 'fit'", line(f, x)),
        None => String::new(),
    };
    vec![
        (
            "gamma_max.gp".to_string(),
            format!(
                "{PREAMBLE}set title 'Critical coupling'\nset xlabel 'log10 N'\nset ylabel 'log10(gamma_max - gamma_c)'\n\
                 plot '{criticals_csv}' using (log10($1)):(log10($2 - {gamma_c:.17e})) every ::1 with points pt 7 title 'data'{}\n",
                fitted(gamma_fit, "x")
            ),
        ),
        (
            "fmin.gp".to_string(),
            format!(
                "{PREAMBLE}set title 'Fidelity minimum'\nset xlabel 'N'\nset ylabel 'log10 F_min'\n\
                 plot '{criticals_csv}' using 1:(log10($3)) every ::1 with points pt 7 title 'data'{}\n",
                fitted(fmin_fit, "x")
            ),
        ),
        (
            "chi_max.gp".to_string(),
            format!(
                "{PREAMBLE}set title 'Susceptibility maximum'\nset xlabel 'log10 N'\nset ylabel 'log10 chi_max'\n\
                 plot '{criticals_csv}' using (log10($1)):(log10($4)) every ::1 with points pt 7 title 'data'{}\n",
                fitted(chi_fit, "x")
            ),
        ),
    ]
}

pub fn collapse_script(collapse_csv: &str, nu: f64) -> (String, String) {
    (
        "collapse.gp".to_string(),
        format!(
            "{PREAMBLE}set title 'Specific susceptibility, nu = {nu}'\nset xlabel 'N^nu (gamma - gamma_max)'\nset ylabel 'chi_s'\n\
             set xrange [-2:2]\nset palette rgb 33,13,10\nset cblabel 'N'\n\
             plot '{collapse_csv}' using 2:3:1 every ::1 with points pt 7 ps 0.5 palette notitle\n"
        ),
    )
}

pub fn converge_script(report_csv: &str) -> (String, String) {
    (
        "converge.gp".to_string(),
        format!(
            "{PREAMBLE}set title 'Truncation ladder'\nset xlabel 'n_max'\nset ylabel 'Delta P'\nset logscale y\n\
             plot '{report_csv}' using 1:2 every ::1 with linespoints title 'bound', \\\n     \
             '{report_csv}' using 1:3 every ::1 with linespoints title 'exact'\n"
        ),
    )
}
