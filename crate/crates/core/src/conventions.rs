//! Formula variants.
//!
//! Several closed forms in the asymptotic theory exist in more than one
//! printed version, and some printed versions do not match direct numerics.
//! Each choice is a flag here, so experiments can compare them side by side.
//! [`Conventions::derived`] is the set that reproduces direct integration and
//! is the library default; [`Conventions::literal`] builds any combination of
//! the as-printed forms.

use serde::Serialize;

/// Slow phase correction and polarization of the pre-capture WKB term.
///
/// With r = (θ−1)/(θ+1) and L = ln r:
///
/// * `Doubled`: s = ω/ε + φ₁₀ + α²(2θ + 2L), φ ∝ r^{1/4} sin s + i r^{−1/4} cos s
/// * `Negated`: s = ω/ε + φ₁₀ − α²(θ + L), φ ∝ r^{1/4} sin s − i r^{−1/4} cos s
/// * `Averaged`: s = ω/ε + φ₁₀ + α²(θ + ¾L), same polarization as `Negated`.
///   This is the phase obtained by averaging the cubic term over one fast
///   period; its rate is α²(1+2θ²)/(2(θ²−1)).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseVariantPre {
    Doubled,
    Negated,
    Averaged,
}

impl PhaseVariantPre {
    pub const ALL: [PhaseVariantPre; 3] = [Self::Doubled, Self::Negated, Self::Averaged];

    /// +1 for the sin + i cos polarization, −1 for sin − i cos.
    pub fn polarization(self) -> f64 {
        match self {
            Self::Doubled => 1.0,
            Self::Negated | Self::Averaged => -1.0,
        }
    }
}

/// Closed form for ρ² and υ given the connection parameter p.
///
/// * `Plain`: ρ² = ln((1+|p|²)/(3|Im p|))/π, υ = −π/4 + 7/2·ρ² − arg Γ(iρ²) − arg(1+p²)
/// * `Ln2`: same ρ², υ = −π/4 + 7/2·ρ² ln 2 − arg Γ(iρ²) − arg(1+p²)
/// * `Reflected`: ρ² = ln((1+|p|²)/(2|Im p|))/π,
///   υ = −3π/4 − 7/2·ρ² ln 2 + arg Γ(iρ²) + arg(1+p²)
///
/// `Reflected` is the form fitted to direct integration of the layer
/// equation; with denominator 2 the argument of the log is never below 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantVariantPost {
    Plain,
    Ln2,
    Reflected,
}

impl ConstantVariantPost {
    pub const ALL: [ConstantVariantPost; 3] = [Self::Plain, Self::Ln2, Self::Reflected];
}

/// Center the captured oscillation rides on: √(1+θ) or ½√(1+θ).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumVariant {
    FullRoot,
    HalfRoot,
}

impl EquilibriumVariant {
    pub const ALL: [EquilibriumVariant; 2] = [Self::FullRoot, Self::HalfRoot];

    pub fn factor(self) -> f64 {
        match self {
            Self::FullRoot => 1.0,
            Self::HalfRoot => 0.5,
        }
    }
}

/// Amplitude-dependent slow phase G(θ) of the captured solution,
/// S = Ω/ε + φ₀₀ + A₀₀² G(θ).
///
/// * `Expanded`: G = 5/2·θ + 3/4·θ² + (112 − 8θ)√(1+θ)/6 + 3/2·ln(1+θ)
/// * `NormalForm`: G = −(1+θ)/2 − 3/2·ln(1+θ), from the Birkhoff normal form
///   of the frozen Hamiltonian at the center.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SlowPhaseVariant {
    Expanded,
    NormalForm,
}

impl SlowPhaseVariant {
    pub const ALL: [SlowPhaseVariant; 2] = [Self::Expanded, Self::NormalForm];
}

/// How layer data relate to the outer WKB parameters on either side.
///
/// * `Identity`: α̃ = α₁₀, φ̃ = φ₁₀, ρ = A₀₀, υ = φ₀₀.
/// * `LayerScaled`: the phases carry the ln ε and constant shifts that come
///   from rewriting the fast phase in layer variables:
///   φ̃ = −φ₁₀ + α₁₀²(1 − ln 2 + ½ ln ε) and φ₀₀ = υ − ½ρ² ln 2 + ρ² ln ε.
///   Amplitudes still match one to one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchingRule {
    Identity,
    LayerScaled,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Conventions {
    pub phase_pre: PhaseVariantPre,
    pub constant_post: ConstantVariantPost,
    pub equilibrium: EquilibriumVariant,
    pub slow_phase: SlowPhaseVariant,
    pub matching: MatchingRule,
}

impl Conventions {
    /// Conventions that agree with direct integration.
    pub const fn derived() -> Self {
        Self {
            phase_pre: PhaseVariantPre::Averaged,
            constant_post: ConstantVariantPost::Reflected,
            equilibrium: EquilibriumVariant::FullRoot,
            slow_phase: SlowPhaseVariant::NormalForm,
            matching: MatchingRule::LayerScaled,
        }
    }

    /// As-printed forms with identity matching.
    pub const fn literal(
        phase_pre: PhaseVariantPre,
        constant_post: ConstantVariantPost,
        equilibrium: EquilibriumVariant,
    ) -> Self {
        Self {
            phase_pre,
            constant_post,
            equilibrium,
            slow_phase: SlowPhaseVariant::Expanded,
            matching: MatchingRule::Identity,
        }
    }

    /// Every as-printed combination (two phase forms, two constant forms, two
    /// equilibria).
    pub fn literal_candidates() -> Vec<Self> {
        let mut out = Vec::new();
        for pv in [PhaseVariantPre::Doubled, PhaseVariantPre::Negated] {
            for cv in [ConstantVariantPost::Plain, ConstantVariantPost::Ln2] {
                for ev in EquilibriumVariant::ALL {
                    out.push(Self::literal(pv, cv, ev));
                }
            }
        }
        out
    }
}

impl Default for Conventions {
    fn default() -> Self {
        Self::derived()
    }
}
