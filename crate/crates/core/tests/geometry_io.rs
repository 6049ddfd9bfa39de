mod oracles;

use ganit::io::{format_annotations, format_detections, parse_annotations, parse_detections, read_detections, write_detections};
use ganit::{iou, BBox, ClassId, Detection, GroundTruthObject};
use oracles::{corner_iou, Corners};
use proptest::prelude::*;

fn bbox() -> impl Strategy<Value = BBox> {
    (0.0..=1.0f64, 0.0..=1.0f64, 0.001..=1.0f64, 0.001..=1.0f64).prop_map(|(x, y, w, h)| BBox::new(x, y, w, h).unwrap())
}

fn class() -> impl Strategy<Value = ClassId> {
    (0u8..18).prop_map(|c| ClassId::new(c).unwrap())
}

fn corners(b: &BBox) -> Corners {
    Corners::from_center(b.x_center, b.y_center, b.width, b.height)
}

proptest! {
    #[test]
    fn iou_is_symmetric_and_bounded(a in bbox(), b in bbox()) {
        let v = iou(&a, &b);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert_eq!(v, iou(&b, &a));
        prop_assert_eq!(iou(&a, &a), 1.0);
    }

    #[test]
    fn iou_matches_corner_oracle(a in bbox(), b in bbox()) {
        prop_assert!((iou(&a, &b) - corner_iou(corners(&a), corners(&b))).abs() < 1e-12);
    }

    #[test]
    fn iou_ignores_common_translation(a in bbox(), b in bbox(), dx in -0.3..0.3f64, dy in -0.3..0.3f64) {
        let shift = |o: &BBox| BBox { x_center: o.x_center + dx, y_center: o.y_center + dy, ..*o };
        prop_assert!((iou(&a, &b) - iou(&shift(&a), &shift(&b))).abs() < 1e-9);
    }

    #[test]
    fn annotation_round_trip(objs in prop::collection::vec((class(), bbox()), 0..20)) {
        let objs: Vec<GroundTruthObject> = objs.into_iter().map(|(class, bbox)| GroundTruthObject { class, bbox }).collect();
        let back = parse_annotations(&format_annotations(&objs), "t").unwrap();
        prop_assert_eq!(back.len(), objs.len());
        for (a, b) in objs.iter().zip(&back) {
            prop_assert_eq!(a.class, b.class);
            for (u, v) in [(a.bbox.x_center, b.bbox.x_center), (a.bbox.y_center, b.bbox.y_center), (a.bbox.width, b.bbox.width), (a.bbox.height, b.bbox.height)] {
                prop_assert!((u - v).abs() <= 5e-7);
            }
        }
        prop_assert_eq!(format_annotations(&back), format_annotations(&objs));
    }

    #[test]
    fn detection_round_trip(dets in prop::collection::vec((class(), 0.0..=1.0f64, bbox()), 0..20)) {
        let dets: Vec<Detection> = dets.into_iter().map(|(class, confidence, bbox)| Detection { class, confidence, bbox }).collect();
        let text = format_detections(&dets);
        let back = parse_detections(&text, "t").unwrap();
        prop_assert_eq!(back.len(), dets.len());
        for (a, b) in dets.iter().zip(&back) {
            prop_assert!((a.confidence - b.confidence).abs() <= 5e-7);
        }
        prop_assert_eq!(format_detections(&back), text);
    }
}

#[test]
fn files_in_a_directory_are_keyed_by_stem() {
    let dir = tempfile::tempdir().unwrap();
    let d = Detection { class: ClassId::new(3).unwrap(), confidence: 0.9, bbox: BBox::new(0.5, 0.5, 0.1, 0.2).unwrap() };
    write_detections(dir.path().join("b.txt"), &[d]).unwrap();
    write_detections(dir.path().join("a.txt"), &[]).unwrap();
    std::fs::write(dir.path().join("notes.md"), "ignored").unwrap();
    let all = read_detections(dir.path()).unwrap();
    let ids: Vec<&str> = all.iter().map(|(id, _)| id.as_str()).collect();
    assert_eq!(ids, ["a", "b"]);
    assert!(all[0].1.is_empty());
    assert_eq!(all[1].1[0].class, d.class);
}
