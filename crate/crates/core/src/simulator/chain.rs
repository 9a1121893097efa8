use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::geometry::Vec3;

/// Serial chain: an optional vertical prismatic column followed by planar
/// revolute links rotating about the base z axis.
///
/// The joint vector is `[column height (if any), θ₁, …, θₙ]`, where θᵢ is
/// relative to the previous link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KinematicChain {
    pub base: Vec3,
    pub links: Vec<f64>,
    /// Revolute joint limits in radians, one per link.
    pub joint_limits: Vec<(f64, f64)>,
    /// Travel limits of the prismatic column in meters; `None` fixes the
    /// end effector at the base height.
    #[serde(default)]
    pub column: Option<(f64, f64)>,
}

impl Default for KinematicChain {
    /// Desk-scale arm: a 1 m column carrying a 3-link planar arm.
    fn default() -> Self {
        Self {
            base: Vec3::ZERO,
            links: vec![0.4, 0.3, 0.2],
            joint_limits: vec![(-TAU, TAU), (-2.6, 2.6), (-2.6, 2.6)],
            column: Some((0.0, 1.0)),
        }
    }
}

impl KinematicChain {
    /// Planar chain in the base z = 0 plane with ±π limits.
    pub fn planar(links: &[f64]) -> Self {
        Self { base: Vec3::ZERO, links: links.to_vec(), joint_limits: vec![(-PI, PI); links.len()], column: None }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidConfig(m));
        if self.links.is_empty() {
            return bad("chain needs at least one link".into());
        }
        if self.links.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return bad("link lengths must be positive".into());
        }
        if self.joint_limits.len() != self.links.len() {
            return bad(format!("{} links but {} joint limits", self.links.len(), self.joint_limits.len()));
        }
        let limits = self.joint_limits.iter().chain(self.column.iter());
        if limits.into_iter().any(|(lo, hi)| !(lo < hi)) {
            return bad("joint limits must satisfy low < high".into());
        }
        Ok(())
    }

    pub fn dof(&self) -> usize {
        self.links.len() + usize::from(self.column.is_some())
    }

    fn revolute_offset(&self) -> usize {
        usize::from(self.column.is_some())
    }

    /// Limits for every entry of the joint vector.
    pub fn limits(&self) -> Vec<(f64, f64)> {
        self.column.iter().copied().chain(self.joint_limits.iter().copied()).collect()
    }

    pub fn reach(&self) -> f64 {
        self.links.iter().sum()
    }

    /// A comfortable starting configuration away from the stretched-out singularity.
    pub fn rest_pose(&self) -> Vec<f64> {
        let mut q: Vec<f64> = self.column.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect();
        q.extend(self.joint_limits.iter().enumerate().map(|(i, (lo, hi))| {
            let want: f64 = if i == 0 { 0.0 } else { 0.5 };
            want.clamp(*lo, *hi)
        }));
        q
    }

    pub fn forward_kinematics(&self, q: &[f64]) -> Vec3 {
        let off = self.revolute_offset();
        let mut phi = 0.0;
        let (mut x, mut y) = (self.base.x, self.base.y);
        for (l, theta) in self.links.iter().zip(&q[off..]) {
            phi += theta;
            x += l * phi.cos();
            y += l * phi.sin();
        }
        let z = self.base.z + if off == 1 { q[0] } else { 0.0 };
        Vec3::new(x, y, z)
    }

    /// Position Jacobian, 3 × dof.
    pub fn jacobian(&self, q: &[f64]) -> DMatrix<f64> {
        let off = self.revolute_offset();
        let n = self.links.len();
        let mut j = DMatrix::zeros(3, self.dof());
        if off == 1 {
            j[(2, 0)] = 1.0;
        }
        let mut phi = 0.0;
        let mut terms = Vec::with_capacity(n);
        for (l, theta) in self.links.iter().zip(&q[off..]) {
            phi += theta;
            terms.push((l * phi.cos(), l * phi.sin()));
        }
        // joint k moves every link from k outward
        let (mut sx, mut sy) = (0.0, 0.0);
        for k in (0..n).rev() {
            sx += terms[k].0;
            sy += terms[k].1;
            j[(0, off + k)] = -sy;
            j[(1, off + k)] = sx;
        }
        j
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IkParams {
    pub damping: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for IkParams {
    fn default() -> Self {
        Self { damping: 0.1, max_iters: 200, tol: 1e-6 }
    }
}

impl IkParams {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.damping > 0.0) || !(self.tol > 0.0) || self.max_iters == 0 {
            return Err(SimError::InvalidConfig(format!("invalid IK parameters {self:?}")));
        }
        Ok(())
    }
}

/// Position-only damped least-squares IK.
///
/// Each iteration applies `Δq = Jᵀ (J Jᵀ + λ² I)⁻¹ e` and projects the result
/// back into the joint limits. The damping term is scaled by the residual
/// norm (capped at the configured λ²) so the solve keeps converging near
/// stretched-out configurations where fixed damping stalls.
pub fn solve_ik_dls(
    chain: &KinematicChain,
    target: Vec3,
    q_init: &[f64],
    params: &IkParams,
) -> Result<Vec<f64>, SimError> {
    chain.validate()?;
    params.validate()?;
    if q_init.len() != chain.dof() {
        return Err(SimError::InvalidConfig(format!("expected {} joints, got {}", chain.dof(), q_init.len())));
    }
    let limits = chain.limits();
    if let Some(j) = q_init.iter().zip(&limits).position(|(q, (lo, hi))| q < lo || q > hi) {
        return Err(SimError::LimitViolation { joint: j });
    }
    if !target.is_finite() {
        return Err(SimError::InvalidConfig("target is not finite".into()));
    }
    let planar = ((target.x - chain.base.x).powi(2) + (target.y - chain.base.y).powi(2)).sqrt();
    if planar > chain.reach() + params.tol {
        return Err(SimError::Unreachable { residual: planar - chain.reach() });
    }

    let mut q = DVector::from_column_slice(q_init);
    let residual_of = |q: &DVector<f64>| target - chain.forward_kinematics(q.as_slice());
    let mut err = residual_of(&q);
    for _ in 0..params.max_iters {
        let norm = err.norm();
        if norm <= params.tol {
            return Ok(q.as_slice().to_vec());
        }
        let j = chain.jacobian(q.as_slice());
        let lambda_sq = params.damping * params.damping * norm.min(1.0);
        let jjt: Matrix3<f64> = (&j * j.transpose()).fixed_view::<3, 3>(0, 0).into_owned()
            + Matrix3::identity() * lambda_sq;
        let Some(inv) = jjt.try_inverse() else { break };
        let w: Vector3<f64> = inv * err.to_vector();
        let dq = j.transpose() * DVector::from_column_slice(w.as_slice());
        q += dq;
        for (qi, (lo, hi)) in q.iter_mut().zip(&limits) {
            *qi = qi.clamp(*lo, *hi);
        }
        err = residual_of(&q);
    }
    let residual = err.norm();
    if residual <= params.tol {
        return Ok(q.as_slice().to_vec());
    }
    match q.iter().zip(&limits).position(|(qi, (lo, hi))| qi <= lo || qi >= hi) {
        Some(joint) => Err(SimError::LimitViolation { joint }),
        None => Err(SimError::Unreachable { residual }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_link() -> KinematicChain {
        KinematicChain::planar(&[1.0, 1.0])
    }

    fn residual(chain: &KinematicChain, q: &[f64], target: Vec3) -> f64 {
        chain.forward_kinematics(q).distance(target)
    }

    #[test]
    fn already_at_target() {
        let q = solve_ik_dls(&two_link(), Vec3::new(2.0, 0.0, 0.0), &[0.0, 0.0], &IkParams::default()).unwrap();
        assert_eq!(q, vec![0.0, 0.0]);
    }

    #[test]
    fn fully_extended_upward() {
        let chain = two_link();
        let target = Vec3::new(0.0, 2.0, 0.0);
        let q = solve_ik_dls(&chain, target, &[0.0, 0.0], &IkParams::default()).unwrap();
        assert!(residual(&chain, &q, target) <= 1e-6, "q = {q:?}");
    }

    #[test]
    fn interior_target() {
        let chain = two_link();
        let target = Vec3::new(1.2, 0.5, 0.0);
        let q = solve_ik_dls(&chain, target, &[0.0, 0.0], &IkParams::default()).unwrap();
        assert!(residual(&chain, &q, target) < 1e-6);
    }

    #[test]
    fn out_of_reach() {
        assert!(matches!(
            solve_ik_dls(&two_link(), Vec3::new(3.0, 0.0, 0.0), &[0.0, 0.0], &IkParams::default()),
            Err(SimError::Unreachable { .. })
        ));
        // no column: heights other than the base plane cannot be reached
        assert!(matches!(
            solve_ik_dls(&two_link(), Vec3::new(1.0, 0.0, 0.5), &[0.0, 0.5], &IkParams::default()),
            Err(SimError::Unreachable { .. })
        ));
    }

    #[test]
    fn limits() {
        let mut chain = two_link();
        chain.joint_limits = vec![(-0.1, 0.1), (-0.1, 0.1)];
        assert!(matches!(
            solve_ik_dls(&chain, Vec3::new(0.0, 2.0, 0.0), &[0.0, 0.0], &IkParams::default()),
            Err(SimError::LimitViolation { .. })
        ));
        assert!(matches!(
            solve_ik_dls(&chain, Vec3::new(2.0, 0.0, 0.0), &[0.5, 0.0], &IkParams::default()),
            Err(SimError::LimitViolation { joint: 0 })
        ));
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let chain = KinematicChain::default();
        let q = [0.3, 0.4, -0.7, 1.1];
        let j = chain.jacobian(&q);
        let h = 1e-6;
        for c in 0..q.len() {
            let mut qp = q;
            let mut qm = q;
            qp[c] += h;
            qm[c] -= h;
            let d = (chain.forward_kinematics(&qp) - chain.forward_kinematics(&qm)) * (0.5 / h);
            assert!((d.x - j[(0, c)]).abs() < 1e-8);
            assert!((d.y - j[(1, c)]).abs() < 1e-8);
            assert!((d.z - j[(2, c)]).abs() < 1e-8);
        }
    }

    #[test]
    fn chain_validation() {
        let mut c = KinematicChain::default();
        c.joint_limits.pop();
        assert!(c.validate().is_err());
        let c = KinematicChain { links: vec![], joint_limits: vec![], ..KinematicChain::default() };
        assert!(c.validate().is_err());
        let mut c = KinematicChain::default();
        c.column = Some((1.0, 0.0));
        assert!(c.validate().is_err());
    }

    proptest! {
        #[test]
        fn default_chain_reaches_workspace(x in 0.3f64..0.7, y in -0.4f64..0.4, z in 0.1f64..0.9) {
            let chain = KinematicChain::default();
            let target = Vec3::new(x, y, z);
            let q = solve_ik_dls(&chain, target, &chain.rest_pose(), &IkParams::default()).unwrap();
            prop_assert!(residual(&chain, &q, target) <= 1e-6);
            for (qi, (lo, hi)) in q.iter().zip(chain.limits()) {
                prop_assert!(*qi >= lo && *qi <= hi);
            }
        }
    }
}
