//! Text formats: scan and collapse CSV files and comma-separated lists.
//!
//! Reals are written with 17 significant digits so every `f64` survives a
//! write/parse round trip unchanged.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::observables::ScanPoint;
use crate::scaling::CollapsePoint;

pub const SCAN_HEADER: &str = "gamma,fidelity,chi_f,delta_p,energy,degenerate";
pub const COLLAPSE_HEADER: &str = "n_atoms,x,y";

/// Scientific notation with 17 significant digits; `NaN` for NaN.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_real(field: &str, line: usize, what: &str, allow_nan: bool) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("{what}: '{field}' is not a number"),
    })?;
    if v.is_infinite() || (v.is_nan() && !allow_nan) {
        return Err(Error::Parse {
            line,
            message: format!("{what}: '{field}' is not finite"),
        });
    }
    Ok(v)
}

fn records(text: &str, header: &str) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    let width = header.split(',').count();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(k + 1, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(k + 1, |p| p.line() as usize);
        if k == 0 {
            let got: Vec<&str> = rec.iter().collect();
            if got.join(",") != header {
                return Err(Error::Parse {
                    line,
                    message: format!("expected header '{header}'"),
                });
            }
            continue;
        }
        if rec.len() != width {
            return Err(Error::Parse {
                line,
                message: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        out.push((line, rec));
    }
    if text.trim().is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "empty input".into(),
        });
    }
    Ok(out)
}

pub fn format_scan_csv(points: &[ScanPoint]) -> String {
    let mut s = String::with_capacity(32 + points.len() * 120);
    s.push_str(SCAN_HEADER);
    s.push('\n');
    for p in points {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            format_real(p.gamma),
            format_real(p.fidelity),
            format_real(p.chi_f),
            format_real(p.delta_p),
            format_real(p.energy),
            u8::from(p.degenerate)
        );
    }
    s
}

/// Inverse of [`format_scan_csv`]. A row whose observables are all NaN is
/// read back as a failed point.
pub fn parse_scan_csv(text: &str) -> Result<Vec<ScanPoint>> {
    records(text, SCAN_HEADER)?
        .into_iter()
        .map(|(line, r)| {
            let gamma = parse_real(&r[0], line, "gamma", false)?;
            let fidelity = parse_real(&r[1], line, "fidelity", true)?;
            let chi_f = parse_real(&r[2], line, "chi_f", true)?;
            let delta_p = parse_real(&r[3], line, "delta_p", true)?;
            let energy = parse_real(&r[4], line, "energy", true)?;
            let degenerate = match &r[5] {
                "0" => false,
                "1" => true,
                other => {
                    return Err(Error::Parse {
                        line,
                        message: format!("degenerate: expected 0 or 1, found '{other}'"),
                    })
                }
            };
            let nans = [fidelity, chi_f, delta_p, energy]
                .iter()
                .filter(|v| v.is_nan())
                .count();
            if nans != 0 && nans != 4 {
                return Err(Error::Parse {
                    line,
                    message: "a failed row must have every observable NaN".into(),
                });
            }
            Ok(ScanPoint {
                gamma,
                fidelity,
                chi_f,
                delta_p,
                energy,
                degenerate,
                failed: nans == 4,
            })
        })
        .collect()
}

pub fn format_collapse_csv(points: &[CollapsePoint]) -> String {
    let mut s = String::with_capacity(16 + points.len() * 56);
    s.push_str(COLLAPSE_HEADER);
    s.push('\n');
    for p in points {
        let _ = writeln!(s, "{},{},{}", p.n_atoms, format_real(p.x), format_real(p.y));
    }
    s
}

pub fn parse_collapse_csv(text: &str) -> Result<Vec<CollapsePoint>> {
    records(text, COLLAPSE_HEADER)?
        .into_iter()
        .map(|(line, r)| {
            Ok(CollapsePoint {
                n_atoms: parse_atoms(&r[0], line)?,
                x: parse_real(&r[1], line, "x", false)?,
                y: parse_real(&r[2], line, "y", false)?,
            })
        })
        .collect()
}

fn parse_atoms(field: &str, line: usize) -> Result<u32> {
    match field.trim().parse::<u32>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(Error::Parse {
            line,
            message: format!("'{field}' is not a positive atom number"),
        }),
    }
}

/// `"100,120,140"` into distinct positive atom numbers, order preserved.
pub fn parse_n_list(text: &str) -> Result<Vec<u32>> {
    let mut out: Vec<u32> = Vec::new();
    for field in text.split(',') {
        let n = parse_atoms(field, 1)?;
        if out.contains(&n) {
            return Err(Error::Parse {
                line: 1,
                message: format!("atom number {n} listed twice"),
            });
        }
        out.push(n);
    }
    Ok(out)
}

/// `"0,0.3,0.5"` into finite reals.
pub fn parse_real_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|f| parse_real(f.trim(), 1, "list entry", false))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn point(gamma: f64) -> ScanPoint {
        ScanPoint {
            gamma,
            fidelity: 0.9989954501465284,
            chi_f: 2009.099706943296,
            delta_p: 1.6e-7,
            energy: -50.357499101540,
            degenerate: false,
            failed: false,
        }
    }

    #[test]
    fn header_and_row_layout() {
        let s = format_scan_csv(&[point(0.523)]);
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some(SCAN_HEADER));
        let row = lines.next().unwrap();
        assert!(row.starts_with("5.2300000000000002e-1,"));
        assert!(row.ends_with(",0"));
        assert!(s.ends_with('\n'));
    }

    #[test]
    fn failed_rows_round_trip() {
        let pts = vec![point(0.5), ScanPoint::failed_at(0.501)];
        let s = format_scan_csv(&pts);
        let back = parse_scan_csv(&s).unwrap();
        assert!(back[1].failed);
        assert_eq!(format_scan_csv(&back), s);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_scan_csv("").is_err());
        assert!(parse_scan_csv("gamma,fidelity\n").is_err());
        let bad = format!("{SCAN_HEADER}\n0.5,1,0,0,0,2\n");
        assert!(matches!(parse_scan_csv(&bad), Err(Error::Parse { line: 2, .. })));
        let short = format!("{SCAN_HEADER}\n0.5,1,0\n");
        assert!(parse_scan_csv(&short).is_err());
        let partial_nan = format!("{SCAN_HEADER}\n0.5,NaN,0,0,0,0\n");
        assert!(parse_scan_csv(&partial_nan).is_err());
        let inf = format!("{SCAN_HEADER}\ninf,1,0,0,0,0\n");
        assert!(parse_scan_csv(&inf).is_err());
    }

    #[test]
    fn header_only_is_empty_scan() {
        assert!(parse_scan_csv(&format!("{SCAN_HEADER}\n")).unwrap().is_empty());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_n_list("100,120, 140").unwrap(), vec![100, 120, 140]);
        assert!(parse_n_list("100,100").is_err());
        assert!(parse_n_list("0").is_err());
        assert!(parse_n_list("").is_err());
        assert!(parse_n_list("-3").is_err());
        assert_eq!(parse_real_list("0, 0.3,0.5").unwrap(), vec![0.0, 0.3, 0.5]);
        assert!(parse_real_list("0.1,x").is_err());
        assert!(parse_real_list("NaN").is_err());
    }

    #[test]
    fn collapse_round_trip() {
        let pts = vec![
            CollapsePoint { n_atoms: 100, x: 0.0, y: 0.0 },
            CollapsePoint { n_atoms: 1000, x: -1.234, y: 0.5 },
        ];
        let s = format_collapse_csv(&pts);
        assert_eq!(parse_collapse_csv(&s).unwrap(), pts);
        assert_eq!(format_collapse_csv(&parse_collapse_csv(&s).unwrap()), s);
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![
            any::<f64>().prop_filter("finite", |v| v.is_finite()),
            -1e3f64..1e3,
            Just(0.0),
            Just(-0.0),
            Just(f64::MIN_POSITIVE),
            Just(5e-324),
        ]
    }

    proptest! {
        #[test]
        fn scan_csv_round_trip_is_byte_identical(
            rows in proptest::collection::vec((finite(), finite(), finite(), finite(), finite(), any::<bool>()), 0..20)
        ) {
            let pts: Vec<ScanPoint> = rows.into_iter().map(|(g, f, c, d, e, deg)| ScanPoint {
                gamma: g, fidelity: f, chi_f: c, delta_p: d, energy: e, degenerate: deg, failed: false,
            }).collect();
            let s = format_scan_csv(&pts);
            let back = parse_scan_csv(&s).unwrap();
            prop_assert_eq!(back.len(), pts.len());
            for (a, b) in back.iter().zip(&pts) {
                prop_assert_eq!(a.gamma.to_bits(), b.gamma.to_bits());
                prop_assert_eq!(a.energy.to_bits(), b.energy.to_bits());
            }
            prop_assert_eq!(format_scan_csv(&back), s);
        }

        #[test]
        fn collapse_csv_round_trip(rows in proptest::collection::vec((1u32..5000, finite(), finite()), 0..20)) {
            let pts: Vec<CollapsePoint> = rows.into_iter().map(|(n, x, y)| CollapsePoint { n_atoms: n, x, y }).collect();
            let s = format_collapse_csv(&pts);
            prop_assert_eq!(format_collapse_csv(&parse_collapse_csv(&s).unwrap()), s);
        }

        #[test]
        fn parsers_never_panic(s in "\\PC{0,200}") {
            let _ = parse_scan_csv(&s);
            let _ = parse_collapse_csv(&s);
            let _ = parse_n_list(&s);
            let _ = parse_real_list(&s);
        }
    }
}
