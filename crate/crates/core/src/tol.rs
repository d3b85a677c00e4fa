/// Numeric policy shared by every validation and comparison in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub herm: f64,
    pub proj: f64,
    pub unitary: f64,
    pub trace: f64,
    pub psd: f64,
    pub eig: f64,
    /// Probability vectors: sum-to-one slack and snap-to-boundary window.
    pub prob: f64,
    /// Residual allowed when inverting a two-outcome entropy.
    pub inv: f64,
    pub dist: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-10,
            proj: 1e-10,
            unitary: 1e-10,
            trace: 1e-10,
            psd: 1e-9,
            eig: 1e-9,
            prob: 1e-9,
            inv: 1e-12,
            dist: 1e-6,
        }
    }
}
