use b2i::morphops::{connected_components, distance_transform, Connectivity};
use b2i::watershed::{compute_markers, watershed_split, ThresholdScope};
use b2i::Mask;

fn dumbbell(gap: f64) -> Mask {
    let (c0, c1) = (16.0, 16.0 + gap);
    Mask::from_fn(34 + gap as usize, 32, |x, y| {
        let (x, y) = (x as f64, y as f64);
        (x - c0).powi(2) + (y - 16.0).powi(2) <= 100.0 || (x - c1).powi(2) + (y - 16.0).powi(2) <= 100.0
    })
}

/// Marker count from exact Euclidean distances: components of the pixels
/// whose distance reaches `t` times the maximum.
fn euclid_marker_count(m: &Mask, t: f64) -> usize {
    let (w, h) = (m.width() as i64, m.height() as i64);
    let bg: Vec<(i64, i64)> = (-1..=h)
        .flat_map(|y| (-1..=w).map(move |x| (x, y)))
        .filter(|&(x, y)| !m.get_signed(x, y))
        .collect();
    let d: Vec<f64> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .map(|(x, y)| {
            if !m.get_signed(x, y) {
                return 0.0;
            }
            let d2 = bg.iter().map(|&(bx, by)| (bx - x).pow(2) + (by - y).pow(2)).min().unwrap();
            (d2 as f64).sqrt()
        })
        .collect();
    let max = d.iter().cloned().fold(0.0, f64::max);
    let seeds = Mask::from_vec(m.width(), m.height(), d.iter().map(|&v| v > 0.0 && v >= t * max).collect()).unwrap();
    connected_components(&seeds, Connectivity::Eight).count()
}

#[test]
fn dumbbell_markers_follow_the_neck_width() {
    // centers 16 apart leave a neck of half-width 6, above half the peak
    // distance, so one marker; 18 apart narrows it to about 4.4
    for (gap, t) in [(16.0, 0.5), (18.0, 0.5), (18.0, 0.3), (16.0, 0.7)] {
        let m = dumbbell(gap);
        let oracle = euclid_marker_count(&m, t);
        let markers = compute_markers(&distance_transform(&m, 3).unwrap(), t, ThresholdScope::Component).unwrap();
        assert_eq!(markers.count(), oracle, "gap {gap} thresh {t}");
    }
    assert_eq!(euclid_marker_count(&dumbbell(16.0), 0.5), 1);
    assert_eq!(euclid_marker_count(&dumbbell(18.0), 0.5), 2);
}

#[test]
fn two_marker_dumbbell_splits_near_the_neck() {
    let m = dumbbell(18.0);
    let labels = watershed_split(&m, 3, 0.5, ThresholdScope::Component).unwrap();
    assert_eq!(labels.count(), 2);
    // every pixel more than 2 px from the bisector keeps its own lobe's label
    let mid = 16.0 + 9.0;
    let (left, right) = (labels.get(16, 16), labels.get(34, 16));
    assert_ne!(left, right);
    for y in 0..m.height() {
        for x in 0..m.width() {
            if !m.get(x, y) {
                continue;
            }
            let dx = x as f64 - mid;
            if dx < -2.0 {
                assert_eq!(labels.get(x, y), left, "({x},{y})");
            } else if dx > 2.0 {
                assert_eq!(labels.get(x, y), right, "({x},{y})");
            }
        }
    }
}
