use polarflip::campaign::{generate_frame, Runner};
use polarflip::code_spec::{crc_attach, crc_check, encode};
use polarflip::flip::EisScaling;
use polarflip::{BitVector, ChannelConfig, CodeSpec, CrcPoly, Engine, FlipPlan, ForcedDecisions, ScDecoder};
use proptest::prelude::*;

fn code() -> CodeSpec {
    CodeSpec::construct(7, 40, CrcPoly::CRC8, 2.5).unwrap()
}

fn frame(spec: &CodeSpec, ebn0: f64, seed: u64, index: u64) -> polarflip::campaign::Frame {
    let channel = ChannelConfig::new(ebn0, spec.rate(), seed).unwrap();
    generate_frame(spec, &channel, channel.sigma().unwrap(), index).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn crc_round_trip_and_detection(info in prop::collection::vec(0u8..2, 1..400), flip in any::<prop::sample::Index>()) {
        let word = crc_attach(&BitVector::new(info).unwrap(), &CrcPoly::CRC8);
        prop_assert!(crc_check(&word, &CrcPoly::CRC8));
        let mut bad = word.to_vec();
        bad[flip.index(word.len())] ^= 1;
        prop_assert!(!crc_check(&bad, &CrcPoly::CRC8));
    }

    #[test]
    fn noiseless_frames_decode_exactly(seed in any::<u64>(), index in 0u64..1000) {
        let spec = code();
        let channel = ChannelConfig::noiseless(spec.rate(), seed);
        let f = generate_frame(&spec, &channel, 0.0, index).unwrap();
        prop_assert_eq!(encode(&crc_attach(&f.info, spec.crc_poly()), &spec).unwrap().len(), spec.len());
        let out = Engine::ScFlip { t_max: 10 }.decode(&mut ScDecoder::for_spec(&spec), &f.llrs, &spec, &f.u).unwrap();
        prop_assert_eq!(out.info_hat, f.info);
        prop_assert_eq!(out.attempts, 1);
    }

    #[test]
    fn forcing_a_leaf_keeps_the_prefix(seed in any::<u64>(), pick in any::<prop::sample::Index>(), bit in 0u8..2) {
        let spec = code();
        let f = frame(&spec, 1.0, seed, 0);
        let mut dec = ScDecoder::for_spec(&spec);
        let free = dec.decode(&f.llrs, &spec, &ForcedDecisions::new()).unwrap();
        let j = spec.info_indices()[pick.index(spec.non_frozen_count())];
        let forced = dec.decode(&f.llrs, &spec, &ForcedDecisions::single(j, bit)).unwrap();
        prop_assert_eq!(&free.u_hat[..j], &forced.u_hat[..j]);
        prop_assert_eq!(&free.leaf_llrs[..=j], &forced.leaf_llrs[..=j]);
        prop_assert_eq!(forced.u_hat[j], bit);
    }

    #[test]
    fn uniform_eis_over_all_leaves_is_scflip(seed in any::<u64>(), weight in 0.01f64..100.0, t_max in 0usize..12) {
        let spec = code();
        let f = frame(&spec, 1.5, seed, 0);
        let all = spec.info_indices().to_vec();
        let plan = FlipPlan::candidate_set(all.clone(), vec![weight; all.len()]).unwrap();
        let mut dec = ScDecoder::for_spec(&spec);
        let a = Engine::ScFlip { t_max }.decode(&mut dec, &f.llrs, &spec, &f.u).unwrap();
        let b = Engine::Eis { plan, t_max, scaling: EisScaling::Divide }.decode(&mut dec, &f.llrs, &spec, &f.u).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn larger_tmax_never_loses_a_frame(seed in any::<u64>(), t_max in 0usize..15) {
        let spec = code();
        let f = frame(&spec, 1.5, seed, 0);
        let mut dec = ScDecoder::for_spec(&spec);
        let small = Engine::ScFlip { t_max }.decode(&mut dec, &f.llrs, &spec, &f.u).unwrap();
        let large = Engine::ScFlip { t_max: t_max + 1 }.decode(&mut dec, &f.llrs, &spec, &f.u).unwrap();
        if small.crc_pass {
            prop_assert_eq!(small, large);
        } else {
            prop_assert!(large.attempts >= small.attempts);
        }
    }
}

#[test]
fn fer_is_monotone_in_tmax() {
    let spec = code();
    let channel = ChannelConfig::new(1.5, spec.rate(), 12).unwrap();
    let runner = Runner::with_workers(2);
    let mut last = u64::MAX;
    for t_max in [0, 1, 2, 5, 10, 20] {
        let p = runner.run_fer(&spec, &Engine::ScFlip { t_max }, &channel, 4000, None).unwrap();
        assert!(p.frame_errors <= last, "t_max={t_max}: {} > {last}", p.frame_errors);
        last = p.frame_errors;
    }
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let spec = code();
    let channel = ChannelConfig::new(2.0, spec.rate(), 3).unwrap();
    let engine = Engine::ScFlip { t_max: 8 };
    let base = Runner::with_workers(1).run_fer(&spec, &engine, &channel, 30_000, Some(250)).unwrap();
    for (workers, batch) in [(2, 100), (4, 777), (8, 4096)] {
        let runner = Runner::with_workers(workers).batch_size(batch);
        assert_eq!(runner.run_fer(&spec, &engine, &channel, 30_000, Some(250)).unwrap(), base);
        let a = Runner::with_workers(1).profile_e1(&spec, &channel, 3000).unwrap();
        assert_eq!(runner.profile_e1(&spec, &channel, 3000).unwrap(), a);
    }
    let log1 = Runner::with_workers(1).frame_log(&spec, &engine, &channel, 100, 400).unwrap();
    let log3 = Runner::with_workers(3).frame_log(&spec, &engine, &channel, 100, 400).unwrap();
    assert_eq!(log1, log3);
}
