//! Convergence tables: the row schema shared by every study mode, plus the
//! rate computation.

use serde::{Deserialize, Serialize};

use crate::verify::fit_order;

/// Which column drives the rate computation and the plot abscissa.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScaleVar {
    #[serde(rename = "h")]
    H,
    #[serde(rename = "tau")]
    Tau,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvRow {
    pub level: usize,
    pub h: f64,
    pub tau: f64,
    #[serde(rename = "err_L2_final")]
    pub err_l2_final: Option<f64>,
    #[serde(rename = "err_H1_final")]
    pub err_h1_final: Option<f64>,
    #[serde(rename = "err_L2_max")]
    pub err_l2_max: Option<f64>,
    #[serde(rename = "err_H1_max")]
    pub err_h1_max: Option<f64>,
    #[serde(rename = "rate_L2")]
    pub rate_l2: Option<f64>,
    #[serde(rename = "rate_H1")]
    pub rate_h1: Option<f64>,
    pub energy_final: f64,
    pub min_nodal_len: f64,
    pub max_nodal_len: f64,
    pub eta0: f64,
    pub etan: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub scale: ScaleVar,
    pub rows: Vec<ConvRow>,
}

impl ConvergenceTable {
    pub fn new(scale: ScaleVar, rows: Vec<ConvRow>) -> Self {
        let mut t = ConvergenceTable { scale, rows };
        t.compute_rates();
        t
    }

    fn scale_of(&self, row: &ConvRow) -> f64 {
        match self.scale {
            ScaleVar::H => row.h,
            ScaleVar::Tau => row.tau,
        }
    }

    /// Rates of the max-over-steps error columns between successive rows:
    /// `ln(e_prev/e_cur) / ln(s_prev/s_cur)`, which is the base-2 log ratio
    /// for halving ladders. The first row and any degenerate ratio (zero
    /// error, equal scales) stay blank.
    pub fn compute_rates(&mut self) {
        let scales: Vec<f64> = self.rows.iter().map(|r| self.scale_of(r)).collect();
        for i in 0..self.rows.len() {
            let (rate_l2, rate_h1) = if i == 0 {
                (None, None)
            } else {
                let ds = scales[i - 1] / scales[i];
                let rate = |prev: Option<f64>, cur: Option<f64>| -> Option<f64> {
                    let (p, c) = (prev?, cur?);
                    // Errors at round-off scale (a stationary run) have no
                    // meaningful rate.
                    if p > 1e-14 && c > 1e-14 && ds > 1.0 && p.is_finite() && c.is_finite() {
                        Some((p / c).ln() / ds.ln())
                    } else {
                        None
                    }
                };
                (
                    rate(self.rows[i - 1].err_l2_max, self.rows[i].err_l2_max),
                    rate(self.rows[i - 1].err_h1_max, self.rows[i].err_h1_max),
                )
            };
            self.rows[i].rate_l2 = rate_l2;
            self.rows[i].rate_h1 = rate_h1;
        }
    }

    /// Least-squares order of the max H1 error over the last `k` rows, or
    /// `None` when any of them is missing or nonpositive.
    pub fn fitted_h1_order(&self, k: usize) -> Option<f64> {
        self.fitted_order(k, |r| r.err_h1_max)
    }

    pub fn fitted_l2_order(&self, k: usize) -> Option<f64> {
        self.fitted_order(k, |r| r.err_l2_max)
    }

    fn fitted_order(&self, k: usize, col: impl Fn(&ConvRow) -> Option<f64>) -> Option<f64> {
        if self.rows.len() < k || k < 2 {
            return None;
        }
        let mut pts = Vec::with_capacity(k);
        for r in &self.rows[self.rows.len() - k..] {
            let e = col(r)?;
            if !(e > 0.0 && e.is_finite()) {
                return None;
            }
            pts.push((self.scale_of(r), e));
        }
        Some(fit_order(&pts))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(level: usize, h: f64, tau: f64, e: Option<f64>) -> ConvRow {
        ConvRow {
            level,
            h,
            tau,
            err_l2_final: e,
            err_h1_final: e,
            err_l2_max: e.map(|x| 2.0 * x),
            err_h1_max: e,
            rate_l2: None,
            rate_h1: None,
            energy_final: 0.0,
            min_nodal_len: 1.0,
            max_nodal_len: 1.0,
            eta0: 0.0,
            etan: 0.0,
            wall_time_s: 0.0,
        }
    }

    #[test]
    fn rates_are_log2_ratios_on_a_halving_ladder() {
        // Errors h^2 on h = 1/4, 1/8, 1/16: every rate is exactly 2.
        let rows = (0..3)
            .map(|i| {
                let h = 0.25 / f64::powi(2.0, i);
                row(i as usize, h, 1e-3, Some(h * h))
            })
            .collect();
        let t = ConvergenceTable::new(ScaleVar::H, rows);
        assert!(t.rows[0].rate_h1.is_none());
        for r in &t.rows[1..] {
            assert!((r.rate_h1.unwrap() - 2.0).abs() < 1e-12);
            assert!((r.rate_l2.unwrap() - 2.0).abs() < 1e-12);
        }
        assert!((t.fitted_h1_order(3).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_errors_leave_rates_blank() {
        let rows = vec![
            row(0, 0.5, 1e-2, Some(0.0)),
            row(1, 0.25, 1e-2, Some(0.0)),
        ];
        let t = ConvergenceTable::new(ScaleVar::H, rows);
        assert!(t.rows[1].rate_h1.is_none());
        assert!(t.fitted_h1_order(2).is_none());
    }

    #[test]
    fn tau_scale_uses_the_tau_column() {
        let rows = (0..3)
            .map(|i| {
                let tau = 0.1 / f64::powi(2.0, i);
                row(i as usize, 0.05, tau, Some(tau * tau))
            })
            .collect();
        let t = ConvergenceTable::new(ScaleVar::Tau, rows);
        assert!((t.rows[2].rate_h1.unwrap() - 2.0).abs() < 1e-12);
    }
}
