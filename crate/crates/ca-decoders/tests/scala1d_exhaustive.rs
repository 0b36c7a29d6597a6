use ca_decoders::{RepetitionState, Scala1D};

#[test]
fn ml_equivalence_erosion_and_signal_law() {
    for d in [3usize, 5, 7, 9, 11, 13] {
        let mut worst = 0;
        for e in 0..(1u128 << d) {
            let init = RepetitionState::from_bits(d, e).unwrap();
            let w0 = init.weight();
            let (fin, n_sigs) = Scala1D::run_code_capacity(&init);
            if w0 < d.div_ceil(2) {
                assert_eq!(fin.bits(), 0, "d={d} e={e:b}");
            } else {
                assert_eq!(fin.weight(), d, "d={d} e={e:b}");
            }
            assert_eq!(n_sigs, 4 * w0.min(d - w0), "d={d} e={e:b}");
            let t = Scala1D::erosion_time(&init, d).unwrap();
            assert!(t <= d - 2, "d={d} e={e:b} t={t}");
            worst = worst.max(t);
        }
        assert_eq!(worst, d - 2);
    }
}
