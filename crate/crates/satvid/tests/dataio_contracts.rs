//! File-level and cross-module data-path checks: CSV round-trips under
//! arbitrary records, conversion bounds, the motion filter on a rendered
//! scene, and tile/stack assembly from generated frames.

use proptest::prelude::*;
use satvid::dataio::{
    convert_16_to_8, downscale, extract_tile, filter_moving, format_annotations, make_stacks,
    parse_annotations, tile_roobis, AnnotationRecord, PointAnnotations, DEFAULT_MIN_DISPLACEMENT,
    DEFAULT_MOTION_WINDOW,
};
use satvid::synth::{generate, ScenarioSpec};
use satvid::{Gray16Frame, GrayFrame};

proptest! {
    #[test]
    fn annotation_round_trip_is_exact(
        records in prop::collection::vec(
            (0usize..500, -100.0f32..4000.0, -100.0f32..4000.0, prop::option::of(0u64..50)),
            0..40,
        )
    ) {
        // Deduplicate (frame, track) pairs, which the container rejects.
        let mut seen = std::collections::HashSet::new();
        let records: Vec<AnnotationRecord> = records
            .into_iter()
            .filter(|(f, _, _, id)| id.is_none() || seen.insert((*f, id.unwrap())))
            .map(|(frame_index, x, y, track_id)| AnnotationRecord { frame_index, x, y, track_id })
            .collect();
        let annotations = PointAnnotations::new(records).unwrap();
        let text = format_annotations(&annotations);
        let reparsed = parse_annotations(&text).unwrap();
        prop_assert_eq!(annotations.records(), reparsed.records());
    }

    #[test]
    fn downscale_preserves_value_bounds(factor in 0.21f64..1.0) {
        let mut frame = GrayFrame::new(23, 17);
        for (i, v) in frame.data_mut().iter_mut().enumerate() {
            *v = ((i * 37) % 256) as u8;
        }
        let lo = *frame.data().iter().min().unwrap();
        let hi = *frame.data().iter().max().unwrap();
        let small = downscale(&frame, factor).unwrap();
        for &v in small.data() {
            prop_assert!(v >= lo && v <= hi);
        }
    }
}

#[test]
fn conversion_pipeline_handles_16_bit_footage() {
    // Gradient with a hot pixel: percentile clipping must keep the gradient
    // spread over most of the 8-bit range instead of crushing it.
    let mut data = vec![0u16; 64 * 64];
    for y in 0..64 {
        for x in 0..64 {
            data[y * 64 + x] = (y * 300) as u16;
        }
    }
    data[10 * 64 + 10] = 60_000;
    let frame = Gray16Frame::from_vec(64, 64, data);
    let converted = convert_16_to_8(&frame);
    assert_eq!(converted.get(10, 10), 255);
    let spread = converted.data().iter().copied().max().unwrap()
        - converted.data().iter().copied().min().unwrap();
    assert!(spread > 200, "clipped conversion lost dynamic range: spread {spread}");

    let half = downscale(&converted, 0.5).unwrap();
    assert_eq!((half.width(), half.height()), (32, 32));
}

#[test]
fn motion_filter_drops_parked_tracks_from_a_rendered_scene() {
    let mut spec = ScenarioSpec::default_scene(17);
    spec.speed_range = (1.0, 1.8);
    spec.frame_count = 12;
    let data = generate(&spec).unwrap();

    let mut records = data.annotations.records().to_vec();
    let parked_id = spec.vehicle_count as u64 + 7;
    for t in 0..spec.frame_count {
        records.push(AnnotationRecord { frame_index: t, x: 30.0, y: 30.0, track_id: Some(parked_id) });
    }
    let with_parked = PointAnnotations::new(records).unwrap();
    let moving =
        filter_moving(&with_parked, DEFAULT_MIN_DISPLACEMENT, DEFAULT_MOTION_WINDOW).unwrap();

    assert!(moving.records().iter().all(|r| r.track_id != Some(parked_id)));
    // Every real vehicle moves at >= 1 px/frame, so the filter keeps them all.
    assert_eq!(moving.len(), data.annotations.len());
}

#[test]
fn stacks_assemble_from_generated_frames_with_skip() {
    let mut spec = ScenarioSpec::default_scene(23);
    spec.frame_count = 13;
    let data = generate(&spec).unwrap();
    let roobis = tile_roobis(spec.width, spec.height, 96).unwrap();
    assert_eq!(roobis.len(), 4);

    let (stacks, summary) = make_stacks(&data.frames, &data.annotations, 5, 2, &roobis).unwrap();
    // margin = (5-1)/2 * 2 = 4, so mid frames 4..=8 are coverable.
    assert_eq!(summary.produced, 5 * roobis.len());
    assert_eq!(summary.skipped_mid_frames, 8);
    for (stack, _points) in &stacks {
        assert_eq!(stack.channels(), 5);
        assert!((4..=8).contains(&stack.mid_frame_index));
        let tensor = stack.to_tensor();
        assert_eq!(tensor.shape(), [1, 5, 96, 96]);
    }

    // The mid plane is the normalized tile of the mid frame, bit for bit.
    let (s, _) = &stacks[0];
    let tile = extract_tile(&data.frames[s.mid_frame_index], &roobis[0]);
    let expected = tile.to_normalized();
    assert_eq!(s.plane(2), &expected[..]);
}
