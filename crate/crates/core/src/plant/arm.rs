//! Rigid-body model of the 4-DOF haptic arm.
//!
//! Joint 1 yaws the whole arm about the base z-axis; joints 2-4 pitch about
//! their local y-axes. Link 1 rises vertically from the base, links 2-4
//! extend along their local x-axes. Each link carries a point mass at its
//! distal end and the handle/gripper is a point mass at the tip. Every joint
//! also carries a constant reflected rotor inertia on the diagonal of `M`.

use nalgebra::{Matrix3x4, Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::spatial::{rot_y, rot_z, Vec3};

pub type Joint4 = Vector4<f64>;
pub type Jacobian = Matrix3x4<f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HapticArmModel {
    /// Link lengths (m), base to tip.
    pub link_lengths: [f64; 4],
    /// Point mass at the distal end of each link (kg).
    pub link_masses: [f64; 4],
    /// Gripper/handle point mass at the tip (kg).
    pub payload_mass: f64,
    /// Reflected servo rotor inertia per joint (kg m^2).
    pub rotor_inertia: [f64; 4],
    pub gravity: f64,
}

impl Default for HapticArmModel {
    fn default() -> Self {
        Self {
            link_lengths: [0.10, 0.20, 0.20, 0.10],
            link_masses: [0.30, 0.25, 0.20, 0.15],
            payload_mass: 0.10,
            rotor_inertia: [0.005; 4],
            gravity: 9.81,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HapticArmState {
    pub theta: Joint4,
    pub theta_dot: Joint4,
}

/// Mass matrix, Coriolis matrix and gravity vector at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmDynamics {
    pub mass: Matrix4<f64>,
    pub coriolis: Matrix4<f64>,
    pub gravity: Joint4,
}

/// Joint frames and mass locations for one configuration.
struct Chain {
    origins: [Vec3; 4],
    axes: [Vec3; 4],
    points: [Vec3; 4],
}

impl HapticArmModel {
    pub fn validate(&self) -> Result<(), String> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !self.link_lengths.iter().all(|&l| positive(l)) {
            return Err("haptic arm link lengths must be positive".into());
        }
        if !self.link_masses.iter().all(|&m| positive(m)) || !positive(self.payload_mass) {
            return Err("haptic arm masses must be positive".into());
        }
        if !self.rotor_inertia.iter().all(|&j| j.is_finite() && j >= 0.0) {
            return Err("haptic arm rotor inertia must be non-negative".into());
        }
        if !(self.gravity.is_finite() && self.gravity >= 0.0) {
            return Err("haptic arm gravity must be non-negative".into());
        }
        Ok(())
    }

    fn point_masses(&self) -> [f64; 4] {
        let mut m = self.link_masses;
        m[3] += self.payload_mass;
        m
    }

    fn chain(&self, theta: &Joint4) -> Chain {
        let [l1, l2, l3, l4] = self.link_lengths;
        let yaw = rot_z(theta[0]);
        let base_y = yaw * Vec3::y();

        let o1 = Vec3::zeros();
        let o2 = Vec3::new(0.0, 0.0, l1);
        let r2 = yaw * rot_y(theta[1]);
        let o3 = o2 + r2 * Vec3::new(l2, 0.0, 0.0);
        let r3 = r2 * rot_y(theta[2]);
        let o4 = o3 + r3 * Vec3::new(l3, 0.0, 0.0);
        let r4 = r3 * rot_y(theta[3]);
        let tip = o4 + r4 * Vec3::new(l4, 0.0, 0.0);

        Chain {
            origins: [o1, o2, o3, o4],
            axes: [Vec3::z(), base_y, base_y, base_y],
            points: [o2, o3, o4, tip],
        }
    }

    /// Position of every point mass (last entry is the tip).
    pub fn mass_positions(&self, theta: &Joint4) -> [Vec3; 4] {
        self.chain(theta).points
    }

    fn point_jacobian(chain: &Chain, i: usize) -> Jacobian {
        let mut jac = Jacobian::zeros();
        for j in 0..=i {
            let col = chain.axes[j].cross(&(chain.points[i] - chain.origins[j]));
            jac.set_column(j, &col);
        }
        jac
    }

    /// d(J_i)/d(theta_k) for point `i`.
    fn point_jacobian_derivative(chain: &Chain, i: usize, k: usize) -> Jacobian {
        let mut d = Jacobian::zeros();
        if k > i {
            return d;
        }
        let p = chain.points[i];
        let ak = chain.axes[k];
        for j in 0..=i {
            let aj = chain.axes[j];
            let r = p - chain.origins[j];
            let col = if k < j {
                ak.cross(&aj).cross(&r) + aj.cross(&ak.cross(&r))
            } else {
                aj.cross(&ak.cross(&(p - chain.origins[k])))
            };
            d.set_column(j, &col);
        }
        d
    }

    /// Tip position in the arm base frame and its translational Jacobian.
    pub fn forward_kinematics(&self, theta: &Joint4) -> (Vec3, Jacobian) {
        let chain = self.chain(theta);
        (chain.points[3], Self::point_jacobian(&chain, 3))
    }

    pub fn mass_matrix(&self, theta: &Joint4) -> Matrix4<f64> {
        let chain = self.chain(theta);
        let masses = self.point_masses();
        let mut m = Matrix4::from_diagonal(&Joint4::from(self.rotor_inertia));
        for (i, &mi) in masses.iter().enumerate() {
            let jac = Self::point_jacobian(&chain, i);
            m += mi * jac.transpose() * jac;
        }
        m
    }

    /// Partial derivatives of the mass matrix, one per joint.
    pub fn mass_matrix_partials(&self, theta: &Joint4) -> [Matrix4<f64>; 4] {
        let chain = self.chain(theta);
        let masses = self.point_masses();
        let mut out = [Matrix4::zeros(); 4];
        for (k, dm) in out.iter_mut().enumerate() {
            for (i, &mi) in masses.iter().enumerate() {
                let jac = Self::point_jacobian(&chain, i);
                let djac = Self::point_jacobian_derivative(&chain, i, k);
                let term = djac.transpose() * jac;
                *dm += mi * (term + term.transpose());
            }
        }
        out
    }

    pub fn gravity_vector(&self, theta: &Joint4) -> Joint4 {
        let chain = self.chain(theta);
        let masses = self.point_masses();
        let mut g = Joint4::zeros();
        for (i, &mi) in masses.iter().enumerate() {
            let jac = Self::point_jacobian(&chain, i);
            g += mi * self.gravity * jac.row(2).transpose();
        }
        g
    }

    pub fn potential_energy(&self, theta: &Joint4) -> f64 {
        let chain = self.chain(theta);
        self.point_masses()
            .iter()
            .zip(chain.points.iter())
            .map(|(m, p)| m * self.gravity * p.z)
            .sum()
    }

    pub fn kinetic_energy(&self, state: &HapticArmState) -> f64 {
        0.5 * state
            .theta_dot
            .dot(&(self.mass_matrix(&state.theta) * state.theta_dot))
    }

    /// `M`, `C` and `G` at `state`. `C` is built from Christoffel symbols so
    /// that `dM/dt - 2C` is skew-symmetric.
    pub fn dynamics(&self, state: &HapticArmState) -> ArmDynamics {
        let mass = self.mass_matrix(&state.theta);
        let dm = self.mass_matrix_partials(&state.theta);
        let qd = &state.theta_dot;
        let mut coriolis = Matrix4::zeros();
        for k in 0..4 {
            for j in 0..4 {
                let mut c = 0.0;
                for i in 0..4 {
                    c += 0.5 * (dm[i][(k, j)] + dm[j][(k, i)] - dm[k][(i, j)]) * qd[i];
                }
                coriolis[(k, j)] = c;
            }
        }
        ArmDynamics {
            mass,
            coriolis,
            gravity: self.gravity_vector(&state.theta),
        }
    }
}

/// Joint accelerations `M^-1 (tau_h + tau_ext - C qd - G)`.
pub fn arm_accel(
    model: &HapticArmModel,
    state: &HapticArmState,
    tau_joint: &Joint4,
    tau_external: &Joint4,
) -> Joint4 {
    let dyn_ = model.dynamics(state);
    accel_from_dynamics(&dyn_, state, tau_joint, tau_external)
}

pub(crate) fn accel_from_dynamics(
    dyn_: &ArmDynamics,
    state: &HapticArmState,
    tau_joint: &Joint4,
    tau_external: &Joint4,
) -> Joint4 {
    let net = tau_joint + tau_external - dyn_.coriolis * state.theta_dot - dyn_.gravity;
    dyn_.mass
        .cholesky()
        .expect("haptic arm mass matrix is positive definite")
        .solve(&net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_joint(rng: &mut ChaCha8Rng, scale: f64) -> Joint4 {
        Joint4::from_fn(|_, _| rng.gen_range(-scale..scale))
    }

    #[test]
    fn home_pose_tip_is_straight_chain() {
        let model = HapticArmModel::default();
        let (tip, _) = model.forward_kinematics(&Joint4::zeros());
        // Link 1 vertical, links 2-4 along +x: (0.2 + 0.2 + 0.1, 0, 0.1).
        assert_abs_diff_eq!(tip, Vec3::new(0.5, 0.0, 0.1), epsilon = 1e-15);
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let model = HapticArmModel::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let q = random_joint(&mut rng, 3.0);
            let (_, jac) = model.forward_kinematics(&q);
            let h = 1e-6;
            for j in 0..4 {
                let mut qp = q;
                let mut qm = q;
                qp[j] += h;
                qm[j] -= h;
                let fd = (model.forward_kinematics(&qp).0 - model.forward_kinematics(&qm).0)
                    / (2.0 * h);
                assert_abs_diff_eq!(fd, jac.column(j).into_owned(), epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn base_yaw_preserves_horizontal_radius() {
        let model = HapticArmModel::default();
        let q = Joint4::new(0.0, -0.4, 0.9, -0.3);
        let r0 = model.forward_kinematics(&q).0.xy().norm();
        for yaw in [0.3, -1.2, 2.5] {
            let mut qy = q;
            qy[0] = yaw;
            let (p, _) = model.forward_kinematics(&qy);
            assert_abs_diff_eq!(p.xy().norm(), r0, epsilon = 1e-14);
        }
    }

    #[test]
    fn static_hold_torque_is_gravity() {
        let model = HapticArmModel::default();
        let state = HapticArmState {
            theta: Joint4::new(0.2, -0.5, 1.0, -0.5),
            theta_dot: Joint4::zeros(),
        };
        let d = model.dynamics(&state);
        assert_abs_diff_eq!(d.coriolis * state.theta_dot, Joint4::zeros());
        let acc = arm_accel(&model, &state, &d.gravity, &Joint4::zeros());
        assert_abs_diff_eq!(acc, Joint4::zeros(), epsilon = 1e-12);
    }

    #[test]
    fn accel_is_linear_in_net_torque() {
        let model = HapticArmModel::default();
        let state = HapticArmState {
            theta: Joint4::new(0.1, -0.3, 0.7, 0.2),
            theta_dot: Joint4::new(0.5, -0.2, 0.1, 0.3),
        };
        let d = model.dynamics(&state);
        let bias = d.coriolis * state.theta_dot + d.gravity;
        let net = Joint4::new(0.3, -0.1, 0.05, 0.02);
        let a1 = arm_accel(&model, &state, &(net + bias), &Joint4::zeros());
        let a2 = arm_accel(&model, &state, &(2.0 * net + bias), &Joint4::zeros());
        assert_abs_diff_eq!(a2, 2.0 * a1, epsilon = 1e-10);
    }

    #[test]
    fn mass_matrix_is_positive_definite() {
        let model = HapticArmModel::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let m = model.mass_matrix(&random_joint(&mut rng, std::f64::consts::PI));
            assert_abs_diff_eq!(m, m.transpose(), epsilon = 1e-15);
            assert!(m.symmetric_eigenvalues().min() > 0.0);
        }
    }

    #[test]
    fn mass_partials_match_finite_differences() {
        let model = HapticArmModel::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let q = random_joint(&mut rng, 3.0);
            let partials = model.mass_matrix_partials(&q);
            for k in 0..4 {
                let h = 1e-6;
                let mut qp = q;
                let mut qm = q;
                qp[k] += h;
                qm[k] -= h;
                let fd = (model.mass_matrix(&qp) - model.mass_matrix(&qm)) / (2.0 * h);
                assert_abs_diff_eq!(fd, partials[k], epsilon = 1e-7);
            }
        }
    }
}
