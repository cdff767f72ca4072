//! Geometric normalization of keypoint frames.
//!
//! Registration runs in two passes. First an affine map estimated on six
//! fixated anchor keypoints takes the whole frame into the standard space,
//! removing face size and position differences. Then each face part with
//! fixated anchors (eyebrow+eye pairs, nose, jawline) gets its own
//! similarity fit onto the canonical anchor coordinates, removing residual
//! part-level variability such as eye-corner distance. The lips keep only
//! the affine step: every lip point moves with expressions, so there is
//! nothing fixated to fit against.

mod canonical;

pub use canonical::canonical_face;

use std::collections::HashSet;
use std::ops::{Add, Mul, Sub};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::KeypointFrame;
use crate::TEMPLATE_POINTS;

/// A 2D point or displacement.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

/// Affine map `p -> A p + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineParams {
    /// Row-major 2x2 linear part.
    pub a: [[f64; 2]; 2],
    pub t: Point,
    /// Euclidean norm of the least-squares residual over all anchor equations.
    pub residual: f64,
}

impl AffineParams {
    pub fn identity() -> Self {
        AffineParams {
            a: [[1.0, 0.0], [0.0, 1.0]],
            t: Point::new(0.0, 0.0),
            residual: 0.0,
        }
    }

    pub fn apply(&self, p: Point) -> Point {
        Point::new(
            self.a[0][0] * p.x + self.a[0][1] * p.y + self.t.x,
            self.a[1][0] * p.x + self.a[1][1] * p.y + self.t.y,
        )
    }
}

/// Similarity map `p -> s R(theta) p + t`.
///
/// A one-anchor fit only identifies translation; such params carry
/// `degenerate = true` with `s = 1, theta = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityParams {
    pub scale: f64,
    pub theta: f64,
    pub translation: Point,
    pub degenerate: bool,
}

impl SimilarityParams {
    pub fn new(scale: f64, theta: f64, translation: Point) -> Self {
        SimilarityParams {
            scale,
            theta,
            translation,
            degenerate: false,
        }
    }

    pub fn identity() -> Self {
        SimilarityParams::new(1.0, 0.0, Point::new(0.0, 0.0))
    }

    pub fn apply(&self, p: Point) -> Point {
        let (sin, cos) = self.theta.sin_cos();
        Point::new(
            self.scale * (cos * p.x - sin * p.y) + self.translation.x,
            self.scale * (sin * p.x + cos * p.y) + self.translation.y,
        )
    }

    /// Apply to every masked-true point of a frame.
    pub fn transform_frame(&self, frame: &KeypointFrame) -> KeypointFrame {
        let mut out = frame.clone();
        for i in 0..TEMPLATE_POINTS {
            if out.mask[i] {
                out.points[i] = self.apply(out.points[i]);
            }
        }
        out
    }
}

/// A face part with its fixated anchor keypoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartGroup {
    pub name: String,
    /// Zero (no similarity step), one (translation only) or two anchors.
    pub anchors: Vec<usize>,
    pub members: Vec<usize>,
    pub canonical_anchors: Vec<Point>,
}

/// Anchor configuration for registration: the six affine anchors plus the
/// per-part similarity groups, with their standard-space target coordinates.
///
/// Built-ins: `"disfa_ck"` (affine anchors 0,16,39,42,27,33) and `"bp4d"`
/// (39,42,36,45,27,33 — the jawline is absent in that layout).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorSet {
    pub id: String,
    pub affine_anchors: [usize; 6],
    pub canonical_affine: [Point; 6],
    pub part_groups: Vec<PartGroup>,
}

impl AnchorSet {
    /// One of the built-in sets: `"disfa_ck"` or `"bp4d"`.
    pub fn builtin(id: &str) -> Result<Self> {
        let affine_anchors: [usize; 6] = match id {
            "disfa_ck" => [0, 16, 39, 42, 27, 33],
            "bp4d" => [39, 42, 36, 45, 27, 33],
            other => {
                return Err(Error::AnchorSet(format!(
                    "unknown built-in anchor set `{other}` (expected disfa_ck or bp4d)"
                )))
            }
        };
        let face = canonical_face();
        let canonical_affine = affine_anchors.map(|i| face[i]);
        let group = |name: &str, anchors: &[usize], members: Vec<usize>| PartGroup {
            name: name.to_string(),
            anchors: anchors.to_vec(),
            members,
            canonical_anchors: anchors.iter().map(|&i| face[i]).collect(),
        };
        let part_groups = vec![
            group("jawline", &[0, 16], (0..=16).collect()),
            group("right_brow_eye", &[36, 39], (17..=21).chain(36..=41).collect()),
            group("left_brow_eye", &[42, 45], (22..=26).chain(42..=47).collect()),
            group("nose", &[27], (27..=35).collect()),
            group("lips", &[], (48..=67).collect()),
        ];
        let set = AnchorSet {
            id: id.to_string(),
            affine_anchors,
            canonical_affine,
            part_groups,
        };
        set.validate()?;
        Ok(set)
    }

    /// Resolve a manifest's `anchor_set` field: built-in id or JSON path.
    pub fn resolve(spec: &str, base_dir: &Path) -> Result<Self> {
        match spec {
            "disfa_ck" | "bp4d" => AnchorSet::builtin(spec),
            other => AnchorSet::from_json_file(&base_dir.join(other)),
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let set: AnchorSet = serde_json::from_str(&text)?;
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for &a in &self.affine_anchors {
            if a >= TEMPLATE_POINTS {
                return Err(Error::AnchorSet(format!("affine anchor {a} out of range")));
            }
            if !seen.insert(a) {
                return Err(Error::AnchorSet(format!("duplicate affine anchor {a}")));
            }
        }
        let mut members_seen = HashSet::new();
        for group in &self.part_groups {
            if group.anchors.len() > 2 {
                return Err(Error::AnchorSet(format!(
                    "part `{}`: at most two anchors supported, got {}",
                    group.name,
                    group.anchors.len()
                )));
            }
            if group.anchors.len() != group.canonical_anchors.len() {
                return Err(Error::AnchorSet(format!(
                    "part `{}`: {} anchors but {} canonical coordinates",
                    group.name,
                    group.anchors.len(),
                    group.canonical_anchors.len()
                )));
            }
            for &m in group.members.iter().chain(group.anchors.iter()) {
                if m >= TEMPLATE_POINTS {
                    return Err(Error::AnchorSet(format!(
                        "part `{}`: index {m} out of range",
                        group.name
                    )));
                }
            }
            for &m in &group.members {
                if !members_seen.insert(m) {
                    return Err(Error::AnchorSet(format!(
                        "template index {m} belongs to more than one part group"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Least-squares affine map taking `src` onto `dst`.
///
/// Solved by QR on the stacked 2n x 6 design. Needs at least three
/// correspondences in general position; collinear or duplicated anchors make
/// the system rank-deficient and are rejected.
pub fn estimate_affine(src: &[Point], dst: &[Point]) -> Result<AffineParams> {
    if src.len() != dst.len() {
        return Err(Error::Shape(format!(
            "affine estimation: {} source vs {} target anchors",
            src.len(),
            dst.len()
        )));
    }
    if src.len() < 3 {
        return Err(Error::Degenerate(format!(
            "affine estimation needs at least 3 anchors, got {}",
            src.len()
        )));
    }
    let n = src.len();
    let mut design = DMatrix::<f64>::zeros(2 * n, 6);
    let mut rhs = DVector::<f64>::zeros(2 * n);
    for (i, (s, d)) in src.iter().zip(dst).enumerate() {
        design[(2 * i, 0)] = s.x;
        design[(2 * i, 1)] = s.y;
        design[(2 * i, 2)] = 1.0;
        design[(2 * i + 1, 3)] = s.x;
        design[(2 * i + 1, 4)] = s.y;
        design[(2 * i + 1, 5)] = 1.0;
        rhs[2 * i] = d.x;
        rhs[2 * i + 1] = d.y;
    }
    let qr = design.clone().qr();
    let r = qr.r();
    let scale = (0..6).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if (0..6).any(|i| r[(i, i)].abs() <= 1e-10 * scale.max(1.0)) {
        return Err(Error::Degenerate(
            "affine anchors are collinear or duplicated".into(),
        ));
    }
    let qt_rhs = qr.q().transpose() * &rhs;
    let sol = r
        .solve_upper_triangular(&qt_rhs)
        .ok_or_else(|| Error::Degenerate("affine anchors are collinear or duplicated".into()))?;
    let params = AffineParams {
        a: [[sol[0], sol[1]], [sol[3], sol[4]]],
        t: Point::new(sol[2], sol[5]),
        residual: 0.0,
    };
    let residual = src
        .iter()
        .zip(dst)
        .map(|(s, d)| params.apply(*s).dist(*d).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(AffineParams { residual, ..params })
}

/// Map every masked-true point of `frame` by `params`; masked-out slots stay
/// at the origin.
pub fn apply_affine(params: &AffineParams, frame: &KeypointFrame) -> KeypointFrame {
    let mut out = frame.clone();
    for i in 0..TEMPLATE_POINTS {
        if out.mask[i] {
            out.points[i] = params.apply(out.points[i]);
        }
    }
    out
}

/// Similarity map from source anchors onto canonical anchors.
///
/// Two anchors give the exact four-parameter solve (both map exactly onto
/// their targets). One anchor only identifies translation, so the result is
/// translation-only with the degenerate flag set.
pub fn estimate_similarity(src: &[Point], dst: &[Point]) -> Result<SimilarityParams> {
    if src.len() != dst.len() {
        return Err(Error::Shape(format!(
            "similarity estimation: {} source vs {} target anchors",
            src.len(),
            dst.len()
        )));
    }
    match src.len() {
        1 => Ok(SimilarityParams {
            scale: 1.0,
            theta: 0.0,
            translation: dst[0] - src[0],
            degenerate: true,
        }),
        2 => {
            let ds = src[1] - src[0];
            if ds.norm() == 0.0 {
                return Err(Error::Degenerate(
                    "coincident source anchors in similarity estimation".into(),
                ));
            }
            // Complex division (dst1 - dst0) / (src1 - src0) gives s*e^{i theta}.
            let dd = dst[1] - dst[0];
            let denom = ds.x * ds.x + ds.y * ds.y;
            let zr = (dd.x * ds.x + dd.y * ds.y) / denom;
            let zi = (dd.y * ds.x - dd.x * ds.y) / denom;
            let scale = zr.hypot(zi);
            if scale == 0.0 {
                return Err(Error::Degenerate(
                    "coincident target anchors in similarity estimation".into(),
                ));
            }
            let theta = zi.atan2(zr);
            // t = dst0 - z * src0 (complex product).
            let translation = Point::new(
                dst[0].x - (zr * src[0].x - zi * src[0].y),
                dst[0].y - (zi * src[0].x + zr * src[0].y),
            );
            Ok(SimilarityParams::new(scale, theta, translation))
        }
        n => Err(Error::InvalidInput(format!(
            "similarity estimation supports 1 or 2 anchors, got {n}"
        ))),
    }
}

/// Full registration of one frame into the standard space.
///
/// All masked-true points get the affine map fitted on the six affine
/// anchors; then each part group with anchors present in the mask gets its
/// own similarity map onto the canonical anchor coordinates. Groups whose
/// anchors are masked out (e.g. the jawline on a 49-point layout) and
/// anchor-less groups (the lips) keep the affine-only result.
pub fn register_frame(frame: &KeypointFrame, anchors: &AnchorSet) -> Result<KeypointFrame> {
    let mut src = Vec::with_capacity(6);
    for &idx in &anchors.affine_anchors {
        if !frame.mask[idx] {
            return Err(Error::Mask(format!(
                "affine anchor {idx} is masked out in subject `{}` frame {} and no fallback anchor set is configured",
                frame.subject_id, frame.frame_index
            )));
        }
        src.push(frame.points[idx]);
    }
    let affine = estimate_affine(&src, &anchors.canonical_affine)?;
    let mut out = apply_affine(&affine, frame);

    for group in &anchors.part_groups {
        if group.anchors.is_empty() {
            continue;
        }
        if group.anchors.iter().any(|&a| !frame.mask[a]) {
            continue;
        }
        let src: Vec<Point> = group.anchors.iter().map(|&a| out.points[a]).collect();
        let sim = estimate_similarity(&src, &group.canonical_anchors)?;
        for &m in &group.members {
            if out.mask[m] {
                out.points[m] = sim.apply(out.points[m]);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn full_frame(points: [Point; 68]) -> KeypointFrame {
        KeypointFrame::full("s", 0, points)
    }

    /// Normal-equations solve of the same affine problem with an explicit
    /// 6x6 Gauss-Jordan inversion.
    fn affine_normal_equations_oracle(src: &[Point], dst: &[Point]) -> AffineParams {
        let n = src.len();
        let mut design = vec![[0.0f64; 6]; 2 * n];
        let mut rhs = vec![0.0f64; 2 * n];
        for i in 0..n {
            design[2 * i][0] = src[i].x;
            design[2 * i][1] = src[i].y;
            design[2 * i][2] = 1.0;
            design[2 * i + 1][3] = src[i].x;
            design[2 * i + 1][4] = src[i].y;
            design[2 * i + 1][5] = 1.0;
            rhs[2 * i] = dst[i].x;
            rhs[2 * i + 1] = dst[i].y;
        }
        let mut ata = [[0.0f64; 6]; 6];
        let mut atb = [0.0f64; 6];
        for row in 0..2 * n {
            for i in 0..6 {
                atb[i] += design[row][i] * rhs[row];
                for j in 0..6 {
                    ata[i][j] += design[row][i] * design[row][j];
                }
            }
        }
        // Gauss-Jordan inversion of ata.
        let mut aug = [[0.0f64; 12]; 6];
        for i in 0..6 {
            aug[i][..6].copy_from_slice(&ata[i]);
            aug[i][6 + i] = 1.0;
        }
        for col in 0..6 {
            let pivot = (col..6)
                .max_by(|&a, &b| aug[a][col].abs().total_cmp(&aug[b][col].abs()))
                .unwrap();
            aug.swap(col, pivot);
            let p = aug[col][col];
            assert!(p.abs() > 1e-12, "oracle: singular normal equations");
            for j in 0..12 {
                aug[col][j] /= p;
            }
            for row in 0..6 {
                if row != col {
                    let factor = aug[row][col];
                    for j in 0..12 {
                        aug[row][j] -= factor * aug[col][j];
                    }
                }
            }
        }
        let mut sol = [0.0f64; 6];
        for i in 0..6 {
            for j in 0..6 {
                sol[i] += aug[i][6 + j] * atb[j];
            }
        }
        AffineParams {
            a: [[sol[0], sol[1]], [sol[3], sol[4]]],
            t: Point::new(sol[2], sol[5]),
            residual: 0.0,
        }
    }

    #[test]
    fn affine_identity_when_src_equals_dst() {
        let face = canonical_face();
        let pts: Vec<Point> = [0usize, 16, 39, 42, 27, 33].iter().map(|&i| face[i]).collect();
        let params = estimate_affine(&pts, &pts).unwrap();
        assert_abs_diff_eq!(params.a[0][0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(params.a[0][1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(params.a[1][0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(params.a[1][1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(params.t.x, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(params.t.y, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(params.residual, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn affine_halves_a_doubled_source() {
        let face = canonical_face();
        let dst: Vec<Point> = [0usize, 16, 39, 42, 27, 33].iter().map(|&i| face[i]).collect();
        let src: Vec<Point> = dst.iter().map(|&p| p * 2.0).collect();
        let params = estimate_affine(&src, &dst).unwrap();
        assert_abs_diff_eq!(params.a[0][0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(params.a[1][1], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(params.a[0][1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(params.t.norm(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn affine_recovers_known_map_and_matches_normal_equations_oracle() {
        // Fixed non-collinear anchors plus a known ground-truth affine.
        let src = [
            Point::new(3.0, 7.0),
            Point::new(91.0, 12.0),
            Point::new(55.0, 63.0),
            Point::new(18.0, 88.0),
            Point::new(77.0, 41.0),
            Point::new(39.0, 29.0),
        ];
        let truth = AffineParams {
            a: [[1.3, -0.4], [0.25, 0.9]],
            t: Point::new(12.0, -7.5),
            residual: 0.0,
        };
        let dst: Vec<Point> = src.iter().map(|&p| truth.apply(p)).collect();
        let est = estimate_affine(&src, &dst).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(est.a[i][j], truth.a[i][j], epsilon = 1e-10);
            }
        }
        assert_abs_diff_eq!(est.t.x, truth.t.x, epsilon = 1e-9);
        assert_abs_diff_eq!(est.t.y, truth.t.y, epsilon = 1e-9);

        // Perturbed targets give a genuine least-squares problem; QR and the
        // normal-equations oracle must agree.
        let noisy: Vec<Point> = dst
            .iter()
            .enumerate()
            .map(|(i, &p)| p + Point::new(0.3 * ((i * 7 % 5) as f64 - 2.0), -0.2 * (i as f64 - 2.5)))
            .collect();
        let est = estimate_affine(&src, &noisy).unwrap();
        let oracle = affine_normal_equations_oracle(&src, &noisy);
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(est.a[i][j], oracle.a[i][j], epsilon = 1e-10);
            }
        }
        assert_abs_diff_eq!(est.t.x, oracle.t.x, epsilon = 1e-8);
        assert_abs_diff_eq!(est.t.y, oracle.t.y, epsilon = 1e-8);
    }

    #[test]
    fn affine_rejects_collinear_anchors() {
        let src: Vec<Point> = (0..6).map(|i| Point::new(i as f64, 2.0 * i as f64)).collect();
        let dst = src.clone();
        let err = estimate_affine(&src, &dst).unwrap_err();
        assert!(err.to_string().contains("collinear"), "{err}");
    }

    #[test]
    fn apply_affine_respects_mask() {
        let mut frame = full_frame(canonical_face());
        frame.mask[0] = false;
        frame.points[0] = Point::new(0.0, 0.0);
        let params = AffineParams {
            a: [[1.0, 0.0], [0.0, 1.0]],
            t: Point::new(5.0, 0.0),
            residual: 0.0,
        };
        let out = apply_affine(&params, &frame);
        assert_eq!(out.points[0], Point::new(0.0, 0.0));
        assert_eq!(out.points[8], frame.points[8] + Point::new(5.0, 0.0));
        assert_eq!(out.mask, frame.mask);
    }

    #[test]
    fn similarity_identity_for_matching_anchors() {
        let src = [Point::new(1.0, 2.0), Point::new(4.0, 6.0)];
        let params = estimate_similarity(&src, &src).unwrap();
        assert_abs_diff_eq!(params.scale, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(params.theta, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(params.translation.norm(), 0.0, epsilon = 1e-12);
        assert!(!params.degenerate);
    }

    #[test]
    fn similarity_undoes_quarter_turn() {
        // Source anchors are the targets rotated +90 degrees about the origin.
        let dst = [Point::new(3.0, 1.0), Point::new(7.0, 5.0)];
        let rot = |p: Point| Point::new(-p.y, p.x);
        let src = [rot(dst[0]), rot(dst[1])];
        let params = estimate_similarity(&src, &dst).unwrap();
        assert_abs_diff_eq!(params.theta, -std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
        assert_abs_diff_eq!(params.scale, 1.0, epsilon = 1e-12);
        for (s, d) in src.iter().zip(&dst) {
            assert_abs_diff_eq!(params.apply(*s).dist(*d), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn one_anchor_gives_translation_only() {
        let params =
            estimate_similarity(&[Point::new(10.0, 10.0)], &[Point::new(12.0, 15.0)]).unwrap();
        assert!(params.degenerate);
        assert_eq!(params.scale, 1.0);
        assert_eq!(params.theta, 0.0);
        assert_eq!(params.translation, Point::new(2.0, 5.0));
    }

    #[test]
    fn coincident_source_anchors_rejected() {
        let p = Point::new(1.0, 1.0);
        let err = estimate_similarity(&[p, p], &[Point::new(0.0, 0.0), Point::new(1.0, 0.0)])
            .unwrap_err();
        assert!(err.to_string().contains("coincident"), "{err}");
    }

    #[test]
    fn registration_fixed_point_on_canonical_frame() {
        let anchors = AnchorSet::builtin("disfa_ck").unwrap();
        let frame = full_frame(canonical_face());
        let out = register_frame(&frame, &anchors).unwrap();
        for i in 0..TEMPLATE_POINTS {
            assert!(
                out.points[i].dist(frame.points[i]) <= 1e-12,
                "slot {i} moved by {}",
                out.points[i].dist(frame.points[i])
            );
        }
    }

    #[test]
    fn registration_pulls_transformed_canonical_back_to_anchors() {
        let anchors = AnchorSet::builtin("disfa_ck").unwrap();
        let face = canonical_face();
        let sim = SimilarityParams::new(1.4, 0.35, Point::new(30.0, -12.0));
        let frame = sim.transform_frame(&full_frame(face));
        let out = register_frame(&frame, &anchors).unwrap();
        for group in &anchors.part_groups {
            if group.anchors.len() == 2 {
                for (&a, &target) in group.anchors.iter().zip(&group.canonical_anchors) {
                    assert!(
                        out.points[a].dist(target) < 1e-10,
                        "group {} anchor {a} residual {}",
                        group.name,
                        out.points[a].dist(target)
                    );
                }
            }
        }
    }

    #[test]
    fn bp4d_mask_registers_without_jawline() {
        let anchors = AnchorSet::builtin("bp4d").unwrap();
        let map = crate::io::TemplateMap::builtin("bp4d").unwrap();
        let mask = map.template_mask();
        let face = canonical_face();
        let mut frame = full_frame(face);
        frame.mask = mask;
        for i in 0..TEMPLATE_POINTS {
            if !mask[i] {
                frame.points[i] = Point::new(0.0, 0.0);
            }
        }
        let sim = SimilarityParams::new(0.8, -0.2, Point::new(10.0, 4.0));
        let moved = sim.transform_frame(&frame);
        let out = register_frame(&moved, &anchors).unwrap();
        for i in 0..17 {
            assert_eq!(out.points[i], Point::new(0.0, 0.0), "jawline slot {i}");
            assert!(!out.mask[i]);
        }
        // Eye-corner anchors land on canonical coordinates.
        for &a in &[36usize, 39, 42, 45] {
            assert!(out.points[a].dist(face[a]) < 1e-10);
        }
    }

    #[test]
    fn registering_with_masked_affine_anchor_errors() {
        let anchors = AnchorSet::builtin("disfa_ck").unwrap();
        let mut frame = full_frame(canonical_face());
        frame.mask[0] = false;
        frame.points[0] = Point::new(0.0, 0.0);
        let err = register_frame(&frame, &anchors).unwrap_err();
        assert!(err.to_string().contains("affine anchor 0"), "{err}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        /// Registering S(f) and f agrees once the global similarity S is removed.
        #[test]
        fn registration_is_similarity_invariant(
            scale in 0.5..2.0f64,
            theta in -3.0..3.0f64,
            tx in -50.0..50.0f64,
            ty in -50.0..50.0f64,
            seed in 0u64..1000,
        ) {
            use rand::{Rng, SeedableRng};
            let anchors = AnchorSet::builtin("disfa_ck").unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut face = canonical_face();
            for p in face.iter_mut() {
                *p = *p + Point::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            }
            let frame = full_frame(face);
            let sim = SimilarityParams::new(scale, theta, Point::new(tx, ty));
            let transformed = sim.transform_frame(&frame);

            let reg_a = register_frame(&frame, &anchors).unwrap();
            let reg_b = register_frame(&transformed, &anchors).unwrap();
            for i in 0..TEMPLATE_POINTS {
                prop_assert!(reg_a.points[i].dist(reg_b.points[i]) < 1e-8,
                    "slot {} differs by {}", i, reg_a.points[i].dist(reg_b.points[i]));
            }
        }
    }
}
