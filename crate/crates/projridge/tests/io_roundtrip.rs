use std::path::Path;

use proptest::prelude::*;
use projridge::core::Matrix;
use projridge::io::{matrix_to_csv, parse_matrix_csv};

proptest! {
    #[test]
    fn csv_text_round_trips_bitwise(
        rows in 1usize..6,
        cols in 1usize..6,
        seed in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 36),
    ) {
        let data: Vec<f64> = seed.into_iter().take(rows * cols).collect();
        let m = Matrix::new(rows, cols, data).unwrap();
        let back = parse_matrix_csv(&matrix_to_csv(&m), Path::new("m.csv")).unwrap();
        prop_assert_eq!(back.nrows(), rows);
        for (a, b) in back.as_slice().iter().zip(m.as_slice()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
