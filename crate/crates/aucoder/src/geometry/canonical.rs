use super::Point;
use crate::TEMPLATE_POINTS;

/// Canonical 68-point face configuration inside a 200x200 box (x right,
/// y down). Registration targets are read from this table, so the standard
/// space is fixed across datasets; metrics are invariant to the particular
/// choice as long as it stays fixed between train and test.
const CANONICAL_FACE: [(f64, f64); TEMPLATE_POINTS] = [
    // jawline 0..=16, left temple -> chin -> right temple
    (20.0, 85.0),
    (24.0, 110.0),
    (30.0, 133.0),
    (40.0, 153.0),
    (54.0, 170.0),
    (70.0, 182.0),
    (86.0, 190.0),
    (93.0, 193.0),
    (100.0, 195.0),
    (107.0, 193.0),
    (114.0, 190.0),
    (130.0, 182.0),
    (146.0, 170.0),
    (160.0, 153.0),
    (170.0, 133.0),
    (176.0, 110.0),
    (180.0, 85.0),
    // right eyebrow 17..=21
    (34.0, 62.0),
    (45.0, 56.0),
    (58.0, 53.0),
    (71.0, 56.0),
    (82.0, 61.0),
    // left eyebrow 22..=26
    (118.0, 61.0),
    (129.0, 56.0),
    (142.0, 53.0),
    (155.0, 56.0),
    (166.0, 62.0),
    // nose bridge 27..=30
    (100.0, 75.0),
    (100.0, 90.0),
    (100.0, 105.0),
    (100.0, 118.0),
    // nose bottom 31..=35
    (84.0, 130.0),
    (92.0, 133.0),
    (100.0, 135.0),
    (108.0, 133.0),
    (116.0, 130.0),
    // right eye 36..=41
    (42.0, 80.0),
    (53.0, 74.0),
    (66.0, 74.0),
    (78.0, 80.0),
    (66.0, 86.0),
    (53.0, 86.0),
    // left eye 42..=47
    (122.0, 80.0),
    (134.0, 74.0),
    (147.0, 74.0),
    (158.0, 80.0),
    (147.0, 86.0),
    (134.0, 86.0),
    // outer lip 48..=59
    (68.0, 160.0),
    (76.0, 151.0),
    (88.0, 146.0),
    (100.0, 144.0),
    (112.0, 146.0),
    (124.0, 151.0),
    (132.0, 160.0),
    (124.0, 169.0),
    (112.0, 173.0),
    (100.0, 175.0),
    (88.0, 173.0),
    (76.0, 169.0),
    // inner lip 60..=67
    (80.0, 160.0),
    (90.0, 155.0),
    (100.0, 154.0),
    (110.0, 155.0),
    (120.0, 160.0),
    (110.0, 165.0),
    (100.0, 166.0),
    (90.0, 165.0),
];

/// The canonical face as template points.
pub fn canonical_face() -> [Point; TEMPLATE_POINTS] {
    let mut face = [Point::new(0.0, 0.0); TEMPLATE_POINTS];
    for (i, &(x, y)) in CANONICAL_FACE.iter().enumerate() {
        face[i] = Point::new(x, y);
    }
    face
}
