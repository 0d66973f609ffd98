/// Every numerical threshold used by the crate, in one place.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Max entrywise |m − m†| accepted as Hermitian.
    pub hermitian: f64,
    /// Eigenvalues closer than this form one degenerate cluster for ordering.
    pub degenerate_cluster: f64,
    /// Amplitudes above this modulus count as significant for the phase convention.
    pub phase_threshold: f64,
    /// Cosine spread grouping eigenvectors in the unitary eigensolver.
    pub unitary_cluster: f64,
    /// Max deviation for a normalized state.
    pub normalization: f64,
    /// Max entrywise |U†U − I| for unitaries built on the walk space.
    pub unitarity: f64,
    /// Unitarity gate for kick operators.
    pub kick_unitarity: f64,
    /// Computational-basis symmetry gate for kick operators.
    pub kick_symmetry: f64,
    /// Second chain eigenvalue at or above `1 − disconnected` means a disconnected chain.
    pub disconnected: f64,
    /// Max eigenphase distance when matching walk phases to chain eigenvalues.
    pub block_match: f64,
    /// Max weight outside the measured subspace before a projective step fails.
    pub norm_loss: f64,
}

impl Tolerances {
    pub const DEFAULT: Self = Self {
        hermitian: 1e-12,
        degenerate_cluster: 1e-9,
        phase_threshold: 1e-8,
        unitary_cluster: 1e-9,
        normalization: 1e-10,
        unitarity: 1e-9,
        kick_unitarity: 1e-10,
        kick_symmetry: 1e-12,
        disconnected: 1e-12,
        block_match: 1e-6,
        norm_loss: 1e-6,
    };

    /// Names accepted by [`Tolerances::set`].
    pub const KEYS: [&'static str; 11] = [
        "hermitian",
        "degenerate_cluster",
        "phase_threshold",
        "unitary_cluster",
        "normalization",
        "unitarity",
        "kick_unitarity",
        "kick_symmetry",
        "disconnected",
        "block_match",
        "norm_loss",
    ];

    /// Overrides one named tolerance. Returns `false` for an unknown name or a value
    /// that is not finite and positive.
    pub fn set(&mut self, key: &str, value: f64) -> bool {
        if !(value.is_finite() && value > 0.0) {
            return false;
        }
        let slot = match key {
            "hermitian" => &mut self.hermitian,
            "degenerate_cluster" => &mut self.degenerate_cluster,
            "phase_threshold" => &mut self.phase_threshold,
            "unitary_cluster" => &mut self.unitary_cluster,
            "normalization" => &mut self.normalization,
            "unitarity" => &mut self.unitarity,
            "kick_unitarity" => &mut self.kick_unitarity,
            "kick_symmetry" => &mut self.kick_symmetry,
            "disconnected" => &mut self.disconnected,
            "block_match" => &mut self.block_match,
            "norm_loss" => &mut self.norm_loss,
            _ => return false,
        };
        *slot = value;
        true
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
