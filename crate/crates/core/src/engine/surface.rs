//! Ising-condition solution surfaces `s(v) = 1 + 1 / (8 U(v))` for truncated and
//! closed-form `U`.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::condition::PulseFamily;
use super::series::u_series;
use crate::error::Result;
use crate::special::brent;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceOrder {
    Truncated(usize),
    Closed,
}

impl fmt::Display for SurfaceOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Truncated(p) => write!(f, "{p}"),
            Self::Closed => f.write_str("closed"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SurfaceRow {
    pub order: SurfaceOrder,
    pub v: f64,
    /// `NaN` where `U(v) = 0`.
    pub s: f64,
    /// `U` vanishes at `v` or changed sign since the previous grid point.
    pub pole_flag: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PoleRecord {
    pub order: SurfaceOrder,
    pub v: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolutionSurface {
    pub family: String,
    pub rows: Vec<SurfaceRow>,
    pub poles: Vec<PoleRecord>,
}

impl SolutionSurface {
    pub fn rows_for(&self, order: SurfaceOrder) -> impl Iterator<Item = &SurfaceRow> {
        self.rows.iter().filter(move |r| r.order == order)
    }

    /// Smallest `|v|` on the curve for `order` with `s > 0`.
    pub fn first_positive_s(&self, order: SurfaceOrder) -> Option<f64> {
        self.rows_for(order)
            .filter(|r| r.s > 0.0)
            .map(|r| r.v.abs())
            .min_by(f64::total_cmp)
    }

    /// CSV with columns `family,p_max,v,s,pole_flag`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "family,p_max,v,s,pole_flag")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{:.16e},{:.16e},{}",
                self.family, r.order, r.v, r.s, r.pole_flag as u8
            )?;
        }
        Ok(())
    }
}

pub fn truncated_solution_surface(
    family: &PulseFamily,
    orders: &[SurfaceOrder],
    v_grid: &[f64],
) -> Result<SolutionSurface> {
    let p_needed = orders
        .iter()
        .filter_map(|o| match o {
            SurfaceOrder::Truncated(p) => Some(*p),
            SurfaceOrder::Closed => None,
        })
        .max()
        .unwrap_or(1);
    let moments = family.moments(p_needed)?;
    let per_order: Result<Vec<(Vec<SurfaceRow>, Vec<PoleRecord>)>> = orders
        .par_iter()
        .map(|&order| {
            let u = |v: f64| match order {
                SurfaceOrder::Truncated(p) => u_series(v, &moments, p).value,
                SurfaceOrder::Closed => family.u(v),
            };
            let mut rows = Vec::with_capacity(v_grid.len());
            let mut poles = Vec::new();
            let mut prev: Option<(f64, f64)> = None;
            for &v in v_grid {
                let uv = u(v);
                let mut pole = uv == 0.0;
                if pole {
                    poles.push(PoleRecord { order, v });
                }
                if let Some((pv, pu)) = prev {
                    if pu * uv < 0.0 {
                        pole = true;
                        poles.push(PoleRecord {
                            order,
                            v: brent(pv, v, u, 1e-14)?,
                        });
                    }
                }
                rows.push(SurfaceRow {
                    order,
                    v,
                    s: if uv == 0.0 {
                        f64::NAN
                    } else {
                        1.0 + 1.0 / (8.0 * uv)
                    },
                    pole_flag: pole,
                });
                prev = Some((v, uv));
            }
            Ok((rows, poles))
        })
        .collect();
    let mut rows = Vec::new();
    let mut poles = Vec::new();
    for (r, p) in per_order? {
        rows.extend(r);
        poles.extend(p);
    }
    Ok(SolutionSurface {
        family: family.name(),
        rows,
        poles,
    })
}

/// Uniform grid of `n + 1` points on `[lo, hi]`.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|k| lo + (hi - lo) * k as f64 / n as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_v_agrees_with_closed_form() {
        let grid: Vec<f64> = uniform_grid(0.005, 0.099, 19);
        let s = truncated_solution_surface(
            &PulseFamily::Cosine,
            &[SurfaceOrder::Truncated(1), SurfaceOrder::Closed],
            &grid,
        )
        .unwrap();
        let t: Vec<_> = s.rows_for(SurfaceOrder::Truncated(1)).collect();
        let c: Vec<_> = s.rows_for(SurfaceOrder::Closed).collect();
        for (a, b) in t.iter().zip(&c) {
            assert!(((a.s - b.s) / b.s).abs() < 0.01);
        }
    }

    #[test]
    fn origin_is_a_pole() {
        let s = truncated_solution_surface(
            &PulseFamily::Cosine,
            &[SurfaceOrder::Closed],
            &[-0.1, 0.0, 0.1],
        )
        .unwrap();
        assert!(s.rows[1].pole_flag);
        assert!(s.rows[1].s.is_nan());
        assert_eq!(s.poles.len(), 1);
    }

    #[test]
    fn csv_header() {
        let s =
            truncated_solution_surface(&PulseFamily::Square, &[SurfaceOrder::Truncated(2)], &[0.5])
                .unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("family,p_max,v,s,pole_flag\nsquare,2,5.0000000000000000e-1,"));
    }
}
