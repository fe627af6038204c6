use gradsurf::cli::{decode_binary, decode_csv, encode_binary, encode_csv, Grid};
use gradsurf::Matrix;
use proptest::prelude::*;

fn grid() -> impl Strategy<Value = Grid> {
    (1usize..12, 1usize..12, 1e-3f64..10.0, 1e-3f64..10.0).prop_flat_map(|(m, n, hx, hy)| {
        prop::collection::vec(-1e12f64..1e12, m * n)
            .prop_map(move |v| Grid::new(Matrix::from_row_slice(m, n, &v), hx, hy))
    })
}

proptest! {
    #[test]
    fn binary_round_trip_is_bit_exact(g in grid()) {
        let back = decode_binary(&encode_binary(&g).unwrap()).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn csv_round_trip_is_exact(g in grid()) {
        let back = decode_csv(&encode_csv(&g.values), (g.hx, g.hy)).unwrap();
        prop_assert_eq!(back.values, g.values);
    }

    #[test]
    fn any_truncation_is_rejected(g in grid(), cut in 1usize..64) {
        let bytes = encode_binary(&g).unwrap();
        let keep = bytes.len().saturating_sub(cut);
        prop_assert!(decode_binary(&bytes[..keep]).is_err());
    }
}

#[test]
fn header_claims_more_than_present() {
    let mut bytes = encode_binary(&Grid::new(Matrix::zeros(3, 5), 1.0, 1.0)).unwrap();
    bytes[4..8].copy_from_slice(&4u32.to_le_bytes());
    bytes[8..12].copy_from_slice(&4u32.to_le_bytes());
    let err = decode_binary(&bytes).unwrap_err().to_string();
    assert!(err.contains("truncated") && err.contains("4×4"), "{err}");
}
