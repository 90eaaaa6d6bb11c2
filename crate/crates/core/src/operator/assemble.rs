use std::sync::Arc;

use num_complex::Complex64;

use super::{OperatorError, OrthonormalCRFrame, OrthonormalJets};
use crate::cr::ComplexFunction;
use crate::geometry::{BoxRegion, CoefficientExpr, FieldJet, Jet2};
use crate::pseudoconcave::LatticeGrid;

/// Partition weights must sum to one within this on the covered region.
pub const PARTITION_TOLERANCE: f64 = 1e-10;
/// Allowed principal-symbol deviation between overlapping pieces.
pub const SYMBOL_TOLERANCE: f64 = 1e-6;
/// Nodes per axis of the probe lattices used for construction checks.
const PROBE_NODES: usize = 4;

/// `P_U = Σ X'_j² + JX'_j² + X₀` on a box `U`.
#[derive(Clone, Debug)]
pub struct OperatorPiece {
    pub region: BoxRegion,
    pub frame: Arc<OrthonormalCRFrame>,
}

/// Operator data at one point of one piece.
#[derive(Clone, Debug)]
pub struct PieceJets {
    pub jets: OrthonormalJets,
    pub drift: FieldJet,
    pub beta: Vec<Complex64>,
}

impl OperatorPiece {
    pub fn at(&self, p: &[f64]) -> Result<PieceJets, OperatorError> {
        if !self.region.contains(p) {
            return Err(OperatorError::OutsideRegion { point: p.to_vec() });
        }
        let jets = self.frame.jets(p)?;
        let (beta, residual) = jets.beta();
        if residual > super::BETA_RESIDUAL_TOLERANCE {
            return Err(OperatorError::BetaResidual {
                point: p.to_vec(),
                residual,
            });
        }
        let drift = jets.drift(&beta);
        Ok(PieceJets { jets, drift, beta })
    }

    pub fn apply_jet(&self, p: &[f64], u: &Jet2) -> Result<f64, OperatorError> {
        let d = self.at(p)?;
        Ok(d.jets.apply(&d.drift, u))
    }
}

/// `Σ ψ_U P_U` over finitely many pieces; a local operator has one piece with `ψ ≡ 1`.
#[derive(Clone, Debug)]
pub struct OperatorP {
    pieces: Vec<OperatorPiece>,
    weights: Vec<CoefficientExpr>,
}

fn probe_lattice(region: &BoxRegion) -> Vec<Vec<f64>> {
    LatticeGrid::new(region.clone(), PROBE_NODES).points()
}

impl OperatorP {
    pub fn pieces(&self) -> &[OperatorPiece] {
        &self.pieces
    }

    pub fn weights(&self) -> &[CoefficientExpr] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].frame.dim()
    }

    pub fn covers(&self, p: &[f64]) -> bool {
        self.pieces.iter().any(|pc| pc.region.contains(p))
    }

    /// `(ψ_U(p), piece)` for the pieces containing `p`.
    fn active(&self, p: &[f64]) -> Result<Vec<(f64, &OperatorPiece)>, OperatorError> {
        let mut out = Vec::new();
        for (piece, w) in self.pieces.iter().zip(&self.weights) {
            if piece.region.contains(p) {
                out.push((w.value(p)?, piece));
            }
        }
        if out.is_empty() {
            return Err(OperatorError::OutsideRegion { point: p.to_vec() });
        }
        Ok(out)
    }

    pub fn apply_jet(&self, p: &[f64], u: &Jet2) -> Result<f64, OperatorError> {
        let mut total = 0.0;
        for (w, piece) in self.active(p)? {
            if w != 0.0 {
                total += w * piece.apply_jet(p, u)?;
            }
        }
        Ok(total)
    }

    pub fn apply(&self, u: &CoefficientExpr, p: &[f64]) -> Result<f64, OperatorError> {
        self.apply_jet(p, &u.jet(p)?)
    }

    pub fn apply_complex(&self, u: &ComplexFunction, p: &[f64]) -> Result<Complex64, OperatorError> {
        let j = u.jet(p)?;
        Ok(Complex64::new(self.apply_jet(p, &j.re)?, self.apply_jet(p, &j.im)?))
    }

    /// Weighted principal symbol matrix at `p`.
    pub fn symbol(&self, p: &[f64]) -> Result<nalgebra::DMatrix<f64>, OperatorError> {
        let mut s = nalgebra::DMatrix::zeros(self.dim(), self.dim());
        for (w, piece) in self.active(p)? {
            if w != 0.0 {
                s += piece.at(p)?.jets.symbol() * w;
            }
        }
        Ok(s)
    }

    /// Operator data of the piece with the largest weight at `p`.
    pub fn dominant_piece(&self, p: &[f64]) -> Result<PieceJets, OperatorError> {
        let active = self.active(p)?;
        let (_, piece) = active
            .iter()
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .expect("active is nonempty");
        piece.at(p)
    }
}

/// Local operator on `region`, checked at a probe lattice of the region.
pub fn assemble_local_operator(oframe: Arc<OrthonormalCRFrame>, region: BoxRegion) -> Result<OperatorP, OperatorError> {
    let piece = OperatorPiece { region, frame: oframe };
    for p in probe_lattice(&piece.region) {
        piece.at(&p)?;
    }
    let dim = piece.frame.dim();
    Ok(OperatorP {
        pieces: vec![piece],
        weights: vec![CoefficientExpr::constant(1.0, dim)],
    })
}

/// Glue local operators with a partition of unity `ψ_U`.
///
/// Checked on probe lattices of every piece: `ψ_U ≥ 0`, `ψ_U = 0` outside
/// `U`, `Σψ_U = 1`, and equal principal symbols where two pieces overlap.
pub fn assemble_global_operator(pieces: Vec<OperatorP>, bumps: Vec<CoefficientExpr>) -> Result<OperatorP, OperatorError> {
    if pieces.len() != bumps.len() || pieces.is_empty() {
        return Err(OperatorError::Partition {
            point: Vec::new(),
            sum: f64::NAN,
        });
    }
    let flat: Vec<OperatorPiece> = pieces
        .into_iter()
        .map(|p| {
            if p.pieces.len() != 1 {
                Err(OperatorError::NestedGluing)
            } else {
                Ok(p.pieces.into_iter().next().expect("one piece"))
            }
        })
        .collect::<Result<_, _>>()?;
    for piece in &flat {
        for p in probe_lattice(&piece.region) {
            let mut sum = 0.0;
            for (other, w) in flat.iter().zip(&bumps) {
                let v = w.value(&p)?;
                if v < -PARTITION_TOLERANCE {
                    return Err(OperatorError::NegativeWeight { point: p, value: v });
                }
                if !other.region.contains(&p) && v.abs() > PARTITION_TOLERANCE {
                    return Err(OperatorError::WeightOutsidePiece { point: p, value: v });
                }
                sum += v;
            }
            if (sum - 1.0).abs() > PARTITION_TOLERANCE {
                return Err(OperatorError::Partition { point: p, sum });
            }
            let symbols = flat
                .iter()
                .filter(|o| o.region.contains(&p))
                .map(|o| o.at(&p).map(|d| d.jets.symbol()))
                .collect::<Result<Vec<_>, _>>()?;
            for s in &symbols[1..] {
                let deviation = (s - &symbols[0]).abs().max();
                if deviation > SYMBOL_TOLERANCE {
                    return Err(OperatorError::SymbolMismatch { point: p, deviation });
                }
            }
        }
    }
    Ok(OperatorP {
        pieces: flat,
        weights: bumps,
    })
}

/// `P u(p)`.
pub fn apply_operator(op: &OperatorP, u: &CoefficientExpr, p: &[f64]) -> Result<f64, OperatorError> {
    op.apply(u, p)
}
