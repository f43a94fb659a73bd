//! CSV rendering. Floats use Rust's shortest round-trip formatting, so equal
//! values always produce equal bytes.

use std::fmt::Write as _;

use floquet_junction::semiclassical::{ContourField, StabilityGrid};
use floquet_junction::spectrum::HistogramRow;
use floquet_junction::ObservableSeries;

pub fn populations_csv(series: &ObservableSeries) -> String {
    let mut out = String::from("time_ns");
    for l in 1..=series.n_sites() {
        let _ = write!(out, ",n_{l}");
    }
    out.push('\n');
    for (t, row) in series.times.iter().zip(&series.populations) {
        let _ = write!(out, "{t}");
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// Long format, one row per `(time, pair)`.
pub fn czz_csv(series: &ObservableSeries) -> String {
    let mut out = String::from("time_ns,i,j,value\n");
    for (t, row) in series.times.iter().zip(&series.correlations) {
        for (&(i, j), v) in series.pairs.iter().zip(row) {
            let _ = writeln!(out, "{t},{i},{j},{v}");
        }
    }
    out
}

pub fn raw_populations_csv(runs: &[ObservableSeries]) -> String {
    let n = runs.first().map_or(0, ObservableSeries::n_sites);
    let mut out = String::from("realization,time_ns");
    for l in 1..=n {
        let _ = write!(out, ",n_{l}");
    }
    out.push('\n');
    for (r, series) in runs.iter().enumerate() {
        for (t, row) in series.times.iter().zip(&series.populations) {
            let _ = write!(out, "{r},{t}");
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
    }
    out
}

pub fn histogram_csv(rows: &[HistogramRow]) -> String {
    let mut out = String::from("r_bin_lo,r_bin_hi,empirical_density,poisson_density,coe_density\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.r_bin_lo, r.r_bin_hi, r.empirical_density, r.poisson_density, r.coe_density
        );
    }
    out
}

pub fn stability_csv(grid: &StabilityGrid) -> String {
    let mut out = String::from("omega,delta1,abs_trace,stable\n");
    for (w, d, tr, s) in grid.rows() {
        let _ = writeln!(out, "{w},{d},{tr},{s}");
    }
    out
}

pub fn contours_csv(field: &ContourField) -> String {
    let mut out = String::from("q,p,energy\n");
    for (q, p, h) in field.rows() {
        let _ = writeln!(out, "{q},{p},{h}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn population_header_and_rows() {
        let s = ObservableSeries {
            times: vec![0.0, 1.0],
            populations: vec![vec![1.0, 0.0], vec![0.5, 0.5]],
            pairs: vec![(1, 2)],
            correlations: vec![vec![0.0], vec![-1.0]],
        };
        assert_eq!(populations_csv(&s), "time_ns,n_1,n_2\n0,1,0\n1,0.5,0.5\n");
        assert_eq!(czz_csv(&s), "time_ns,i,j,value\n0,1,2,0\n1,1,2,-1\n");
        assert_eq!(raw_populations_csv(&[s]).lines().nth(2), Some("0,1,0.5,0.5"));
    }
}
