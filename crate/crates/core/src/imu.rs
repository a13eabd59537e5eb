//! Gyroscope integration and orientation interpolation.
//!
//! Orientations are unit quaternions. Knot `q(t)` maps sensor-frame vectors at
//! time `t` into the sensor frame at the trajectory's reference time (the first
//! sample), so the rotation carrying frame-`t1` vectors into frame `t2` is
//! `q(t2)⁻¹ · q(t1)`.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nanoseconds on the clock shared by the IMU and the camera.
pub type Timestamp = i64;

const NS_PER_S: f64 = 1e9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GyroSample {
    pub t_ns: Timestamp,
    /// Angular rate in rad/s, sensor frame.
    pub omega: Vector3<f64>,
}

impl GyroSample {
    pub fn new(t_ns: Timestamp, wx: f64, wy: f64, wz: f64) -> Self {
        Self {
            t_ns,
            omega: Vector3::new(wx, wy, wz),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OrientationTrajectory {
    knots: Vec<(Timestamp, UnitQuaternion<f64>)>,
}

impl OrientationTrajectory {
    /// Builds a trajectory from explicit knots, checking ordering and unit norms.
    pub fn from_knots(knots: Vec<(Timestamp, UnitQuaternion<f64>)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::TooFewSamples(knots.len()));
        }
        for (i, w) in knots.windows(2).enumerate() {
            if w[1].0 <= w[0].0 {
                return Err(Error::NonMonotonicTimestamps {
                    index: i + 1,
                    prev: w[0].0,
                    next: w[1].0,
                });
            }
        }
        for (_, q) in &knots {
            let n = q.as_ref().norm();
            if !n.is_finite() {
                return Err(Error::NonFinite("quaternion"));
            }
            if (n - 1.0).abs() > 1e-9 {
                return Err(Error::NonUnitQuaternion(n));
            }
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[(Timestamp, UnitQuaternion<f64>)] {
        &self.knots
    }

    pub fn start(&self) -> Timestamp {
        self.knots[0].0
    }

    pub fn end(&self) -> Timestamp {
        self.knots[self.knots.len() - 1].0
    }

    pub fn covers(&self, t0: Timestamp, t1: Timestamp) -> bool {
        t0 >= self.start() && t1 <= self.end()
    }

    /// SLERP between the two knots bracketing `t`.
    pub fn orientation_at(&self, t: Timestamp) -> Result<UnitQuaternion<f64>> {
        if t < self.start() || t > self.end() {
            return Err(Error::OutsideSpan {
                t,
                start: self.start(),
                end: self.end(),
            });
        }
        match self.knots.binary_search_by_key(&t, |k| k.0) {
            Ok(i) => Ok(self.knots[i].1),
            Err(i) => {
                let (t0, q0) = self.knots[i - 1];
                let (t1, q1) = self.knots[i];
                let u = (t - t0) as f64 / (t1 - t0) as f64;
                slerp(q0.as_ref(), q1.as_ref(), u)
            }
        }
    }

    /// Rotation taking sensor-frame vectors at `from` into the sensor frame at `to`.
    pub fn relative_rotation(&self, from: Timestamp, to: Timestamp) -> Result<UnitQuaternion<f64>> {
        let q_from = self.orientation_at(from)?;
        let q_to = self.orientation_at(to)?;
        Ok(q_to.inverse() * q_from)
    }

    /// Re-expresses every knot against a different reference frame (`q' = r · q`).
    pub fn rereferenced(&self, r: &UnitQuaternion<f64>) -> Self {
        Self {
            knots: self
                .knots
                .iter()
                .map(|&(t, q)| (t, UnitQuaternion::new_normalize(*(r * q).as_ref())))
                .collect(),
        }
    }
}

/// Integrates angular rates with the midpoint rule: each step exponentiates the
/// mean of the two bounding rates times the interval.
pub fn integrate_gyro(samples: &[GyroSample]) -> Result<OrientationTrajectory> {
    if samples.len() < 2 {
        return Err(Error::TooFewSamples(samples.len()));
    }
    let mut knots = Vec::with_capacity(samples.len());
    let mut q = UnitQuaternion::identity();
    for (i, s) in samples.iter().enumerate() {
        if !s.omega.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("angular rate"));
        }
        if i > 0 {
            let prev = &samples[i - 1];
            if s.t_ns <= prev.t_ns {
                return Err(Error::NonMonotonicTimestamps {
                    index: i,
                    prev: prev.t_ns,
                    next: s.t_ns,
                });
            }
            let dt = (s.t_ns - prev.t_ns) as f64 / NS_PER_S;
            let step = (prev.omega + s.omega) * (0.5 * dt);
            q = UnitQuaternion::new_normalize(*(q * UnitQuaternion::from_scaled_axis(step)).as_ref());
        }
        knots.push((s.t_ns, q));
    }
    Ok(OrientationTrajectory { knots })
}

/// Constant-angular-velocity interpolation on the shorter arc.
///
/// Inputs are plain quaternions so callers can be told when one is not unit.
pub fn slerp(q0: &Quaternion<f64>, q1: &Quaternion<f64>, u: f64) -> Result<UnitQuaternion<f64>> {
    for q in [q0, q1] {
        let n = q.norm();
        if !n.is_finite() {
            return Err(Error::NonFinite("quaternion"));
        }
        if (n - 1.0).abs() > 1e-6 {
            return Err(Error::NonUnitQuaternion(n));
        }
    }
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::InvalidArgument(format!("slerp fraction {u} outside [0, 1]")));
    }
    if u == 0.0 {
        return Ok(UnitQuaternion::new_unchecked(*q0));
    }
    if u == 1.0 {
        return Ok(UnitQuaternion::new_unchecked(*q1));
    }
    let target = if q0.dot(q1) < 0.0 { -*q1 } else { *q1 };
    let rel = q0.conjugate() * target;
    let axis = rel.imag();
    let s = axis.norm();
    if s == 0.0 {
        return Ok(UnitQuaternion::new_normalize(*q0));
    }
    // rel = (cos h, sin h · n); raise to the power u.
    let half = s.atan2(rel.w) * u;
    let step = Quaternion::from_parts(half.cos(), axis * (half.sin() / s));
    Ok(UnitQuaternion::new_normalize(q0 * step))
}

#[derive(Debug, Serialize, Deserialize)]
struct TraceRow {
    t_ns: i64,
    wx: f64,
    wy: f64,
    wz: f64,
}

/// Parses the `t_ns,wx,wy,wz` CSV trace; rows must be strictly increasing in time.
pub fn read_trace<R: Read>(reader: R) -> Result<Vec<GyroSample>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let expected = ["t_ns", "wx", "wy", "wz"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(Error::InvalidArgument(format!(
            "trace header must be t_ns,wx,wy,wz, got {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out: Vec<GyroSample> = Vec::new();
    for row in rdr.deserialize() {
        let row: TraceRow = row?;
        if let Some(prev) = out.last() {
            if row.t_ns <= prev.t_ns {
                return Err(Error::NonMonotonicTimestamps {
                    index: out.len(),
                    prev: prev.t_ns,
                    next: row.t_ns,
                });
            }
        }
        out.push(GyroSample::new(row.t_ns, row.wx, row.wy, row.wz));
    }
    Ok(out)
}

pub fn write_trace<W: Write>(writer: W, samples: &[GyroSample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for s in samples {
        w.serialize(TraceRow {
            t_ns: s.t_ns,
            wx: s.omega.x,
            wy: s.omega.y,
            wz: s.omega.z,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_trace(path: impl AsRef<Path>) -> Result<Vec<GyroSample>> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(Error::file(path))?;
    read_trace(std::io::BufReader::new(f))
}

pub fn save_trace(path: impl AsRef<Path>, samples: &[GyroSample]) -> Result<()> {
    let path = path.as_ref();
    let f = std::fs::File::create(path).map_err(Error::file(path))?;
    write_trace(std::io::BufWriter::new(f), samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn angle_between(a: &UnitQuaternion<f64>, b: &UnitQuaternion<f64>) -> f64 {
        a.angle_to(b)
    }

    fn constant_rate(omega: Vector3<f64>, hz: i64, seconds: f64) -> Vec<GyroSample> {
        let step = 1_000_000_000 / hz;
        let n = (seconds * hz as f64).round() as i64;
        (0..=n)
            .map(|i| GyroSample {
                t_ns: i * step,
                omega,
            })
            .collect()
    }

    /// Plain-array RK4 integrator for q' = ½ q ⊗ (0, ω), independent of nalgebra.
    fn rk4_oracle(omega: impl Fn(f64) -> [f64; 3], t_end: f64, h: f64) -> [f64; 4] {
        fn deriv(q: [f64; 4], w: [f64; 3]) -> [f64; 4] {
            let [qw, qx, qy, qz] = q;
            let [wx, wy, wz] = w;
            [
                0.5 * (-qx * wx - qy * wy - qz * wz),
                0.5 * (qw * wx + qy * wz - qz * wy),
                0.5 * (qw * wy - qx * wz + qz * wx),
                0.5 * (qw * wz + qx * wy - qy * wx),
            ]
        }
        let add = |a: [f64; 4], b: [f64; 4], s: f64| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2], a[3] + s * b[3]];
        let mut q = [1.0, 0.0, 0.0, 0.0];
        let steps = (t_end / h).round() as usize;
        for i in 0..steps {
            let t = i as f64 * h;
            let k1 = deriv(q, omega(t));
            let k2 = deriv(add(q, k1, h / 2.0), omega(t + h / 2.0));
            let k3 = deriv(add(q, k2, h / 2.0), omega(t + h / 2.0));
            let k4 = deriv(add(q, k3, h), omega(t + h));
            for j in 0..4 {
                q[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
        }
        q
    }

    #[test]
    fn zero_rate_gives_identity_knots() {
        let traj = integrate_gyro(&constant_rate(Vector3::zeros(), 100, 0.5)).unwrap();
        for (_, q) in traj.knots() {
            assert_eq!(*q, UnitQuaternion::identity());
        }
    }

    #[test]
    fn constant_rate_quarter_turn() {
        let traj = integrate_gyro(&constant_rate(Vector3::new(0.0, 0.0, FRAC_PI_2), 100, 1.0)).unwrap();
        let expected = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), FRAC_PI_2);
        assert!(angle_between(&traj.knots().last().unwrap().1, &expected) < 1e-6);
    }

    #[test]
    fn sinusoidal_rate_matches_fine_oracle() {
        let samples: Vec<_> = (0..=3)
            .map(|i| {
                let t = i as f64 * 0.01;
                GyroSample::new(i * 10_000_000, 0.0, t.sin(), 0.0)
            })
            .collect();
        let traj = integrate_gyro(&samples).unwrap();
        let o = rk4_oracle(|t| [0.0, t.sin(), 0.0], 0.03, 1e-5);
        let oracle = UnitQuaternion::new_normalize(Quaternion::new(o[0], o[1], o[2], o[3]));
        assert!(angle_between(&traj.knots()[3].1, &oracle) < 1e-7);
    }

    #[test]
    fn integrate_rejects_bad_input() {
        assert!(matches!(integrate_gyro(&[GyroSample::new(0, 0.0, 0.0, 0.0)]), Err(Error::TooFewSamples(1))));
        let s = [GyroSample::new(5, 0.0, 0.0, 0.0), GyroSample::new(5, 0.0, 0.0, 0.0)];
        assert!(matches!(integrate_gyro(&s), Err(Error::NonMonotonicTimestamps { .. })));
        let s = [GyroSample::new(0, f64::NAN, 0.0, 0.0), GyroSample::new(5, 0.0, 0.0, 0.0)];
        assert!(matches!(integrate_gyro(&s), Err(Error::NonFinite(_))));
    }

    fn quarter_z_traj() -> OrientationTrajectory {
        OrientationTrajectory::from_knots(vec![
            (0, UnitQuaternion::identity()),
            (1000, UnitQuaternion::from_axis_angle(&Vector3::z_axis(), FRAC_PI_2)),
        ])
        .unwrap()
    }

    #[test]
    fn orientation_at_knots_and_between() {
        let traj = quarter_z_traj();
        assert_eq!(traj.orientation_at(1000).unwrap(), traj.knots()[1].1);
        assert_eq!(traj.orientation_at(0).unwrap(), UnitQuaternion::identity());
        let mid = traj.orientation_at(500).unwrap();
        let q45 = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), PI / 4.0);
        assert!(angle_between(&mid, &q45) < 1e-9);
        let quarter = traj.orientation_at(250).unwrap();
        let q225 = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), PI / 8.0);
        assert!(angle_between(&quarter, &q225) < 1e-9);
        assert!(matches!(traj.orientation_at(1001), Err(Error::OutsideSpan { .. })));
        assert!(matches!(traj.orientation_at(-1), Err(Error::OutsideSpan { .. })));
    }

    #[test]
    fn slerp_endpoints_and_near_antipodal() {
        let q0 = UnitQuaternion::from_axis_angle(&Vector3::y_axis(), 0.3);
        let q1 = UnitQuaternion::from_axis_angle(&Vector3::x_axis(), 1.1);
        assert_eq!(slerp(q0.as_ref(), q1.as_ref(), 0.0).unwrap(), q0);
        assert_eq!(slerp(q0.as_ref(), q1.as_ref(), 1.0).unwrap(), q1);

        let eps = 1e-3;
        let id = UnitQuaternion::<f64>::identity();
        let far = UnitQuaternion::from_axis_angle(&Vector3::x_axis(), PI - eps);
        let mid = slerp(id.as_ref(), far.as_ref(), 0.5).unwrap();
        let expected = UnitQuaternion::from_axis_angle(&Vector3::x_axis(), (PI - eps) / 2.0);
        assert!(angle_between(&mid, &expected) < 1e-9);
    }

    #[test]
    fn slerp_takes_shorter_arc() {
        let q0 = UnitQuaternion::<f64>::identity();
        let q1 = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), 0.4);
        let neg = -*q1.as_ref();
        let a = slerp(q0.as_ref(), q1.as_ref(), 0.5).unwrap();
        let b = slerp(q0.as_ref(), &neg, 0.5).unwrap();
        assert!(angle_between(&a, &b) < 1e-12);
    }

    #[test]
    fn slerp_rejects_bad_input() {
        let id = Quaternion::identity();
        let big = Quaternion::new(2.0, 0.0, 0.0, 0.0);
        assert!(matches!(slerp(&id, &big, 0.5), Err(Error::NonUnitQuaternion(_))));
        assert!(matches!(slerp(&id, &id, 1.5), Err(Error::InvalidArgument(_))));
        assert!(matches!(slerp(&id, &id, -0.1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn trace_csv_round_trip_and_unsorted_rejection() {
        let samples = vec![GyroSample::new(0, 0.1, -0.2, 0.3), GyroSample::new(10_000_000, 0.5, 0.25, -1.0)];
        let mut buf = Vec::new();
        write_trace(&mut buf, &samples).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("t_ns,wx,wy,wz"));
        assert_eq!(read_trace(buf.as_slice()).unwrap(), samples);

        let unsorted = "t_ns,wx,wy,wz\n10,0,0,0\n5,0,0,0\n";
        assert!(matches!(read_trace(unsorted.as_bytes()), Err(Error::NonMonotonicTimestamps { .. })));
        let bad_header = "t,wx,wy,wz\n10,0,0,0\n";
        assert!(read_trace(bad_header.as_bytes()).is_err());
    }
}
