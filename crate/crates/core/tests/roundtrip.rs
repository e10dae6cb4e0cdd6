use expression_response::seqdata::{load_sequence, save_sequence, Format, Sequence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_sequence(r: &mut ChaCha8Rng, k: usize) -> Sequence {
    let d = if k.is_multiple_of(2) { 2 } else { 3 };
    let n = r.random_range(1..25);
    let t = r.random_range(2..60);
    let scale = 10f64.powi(r.random_range(-3..6));
    let coords = (0..d * n * t).map(|_| scale * r.random_range(-1.0..1.0)).collect();
    Sequence::new(format!("seq{k}"), d, n, t, coords)
        .unwrap()
        .with_nose_index(r.random_range(0..n))
        .unwrap()
}

#[test]
fn fifty_sequences_survive_every_format() {
    let dir = tempfile::tempdir().unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(11);
    for k in 0..50 {
        let seq = random_sequence(&mut r, k);
        for format in [Format::LongCsv, Format::WideCsv, Format::Json] {
            let path = dir.path().join(format!("seq{k}.{}", format.extension()));
            save_sequence(&seq, &path, format).unwrap();
            let back = load_sequence(&path, format).unwrap();
            assert_eq!(
                (back.dim(), back.num_points(), back.num_frames()),
                (seq.dim(), seq.num_points(), seq.num_frames())
            );
            for (a, b) in seq.coords().iter().zip(back.coords()) {
                assert!((a - b).abs() <= 1e-12 * a.abs().max(f64::MIN_POSITIVE), "{format}: {a} vs {b}");
            }
            // a second save reproduces the file byte for byte
            let again = dir.path().join(format!("again{k}.{}", format.extension()));
            save_sequence(&back, &again, format).unwrap();
            if format != Format::Json {
                assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
            }
        }
    }
}
