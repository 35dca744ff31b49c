//! Numerical tolerances shared by all modules.

use crate::error::{Error, Result};

/// Tolerance set threaded through every numerically fuzzy decision.
///
/// The defaults sit two orders of magnitude above double-precision
/// accumulation error for ambient dimensions up to a few dozen, so genuine
/// degeneracies and roundoff stay separated. Rank decisions additionally
/// require a spectral gap of [`Tol::rank_gap_factor`] around the threshold;
/// borderline inputs fail loudly instead of being classified silently.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tol {
    /// Frame orthonormality defect, `‖BᵀB − I‖_max`.
    pub orth: f64,
    /// Isotropy defect of a Lagrangian frame, `‖Bᵀ J B‖_max`.
    pub lagr: f64,
    /// Subspace equality in the gap metric `‖P_V − P_W‖`.
    pub gap: f64,
    /// Rank threshold, relative to the largest singular value.
    pub rank: f64,
    /// Symmetry defect of operator matrices, relative to `max(1, ‖A‖)`.
    pub sym: f64,
    /// Invertibility threshold, relative to the spectral radius of the
    /// operators involved.
    pub inv: f64,
    /// Nondegeneracy threshold on crossing-form spectra.
    pub nd: f64,
    /// Bisection tolerance in the parameter when locating singular points.
    pub loc: f64,
    /// Maximum gap distance between consecutive samples of a Lagrangian path.
    pub path_gap: f64,
    /// Required ratio between kept and discarded singular values in a rank
    /// decision; spectra without such a gap are rejected as ambiguous.
    pub rank_gap_factor: f64,
}

impl Default for Tol {
    fn default() -> Self {
        Tol {
            orth: 1e-10,
            lagr: 1e-9,
            gap: 1e-8,
            rank: 1e-8,
            sym: 1e-10,
            inv: 1e-8,
            nd: 1e-6,
            loc: 1e-10,
            path_gap: 0.05,
            rank_gap_factor: 1e3,
        }
    }
}

impl Tol {
    /// Set a tolerance by its field name. Used for command-line overrides.
    pub fn set_named(&mut self, key: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::InvalidInput(format!(
                "tolerance `{key}` must be a positive finite number, got {value}"
            )));
        }
        match key {
            "orth" => self.orth = value,
            "lagr" => self.lagr = value,
            "gap" => self.gap = value,
            "rank" => self.rank = value,
            "sym" => self.sym = value,
            "inv" => self.inv = value,
            "nd" => self.nd = value,
            "loc" => self.loc = value,
            "path_gap" => self.path_gap = value,
            "rank_gap_factor" => self.rank_gap_factor = value,
            _ => {
                return Err(Error::InvalidInput(format!(
                    "unknown tolerance name `{key}`"
                )))
            }
        }
        Ok(())
    }

    /// Name/value pairs of the full tolerance set, for report embedding.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("orth", self.orth),
            ("lagr", self.lagr),
            ("gap", self.gap),
            ("rank", self.rank),
            ("sym", self.sym),
            ("inv", self.inv),
            ("nd", self.nd),
            ("loc", self.loc),
            ("path_gap", self.path_gap),
            ("rank_gap_factor", self.rank_gap_factor),
        ]
    }
}
