use super::*;
use crate::model::binary_entropy;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dsbs(p: f64) -> JointSource {
    JointSource::from_rows(&[vec![(1.0 - p) / 2.0, p / 2.0], vec![p / 2.0, (1.0 - p) / 2.0]]).unwrap()
}

fn xor_hamming() -> DistortionFn {
    DistortionFn::hamming_to(2, 2, 2, |x, y| x ^ y).unwrap()
}

/// Körner-Marton system: U trivial, V = X, Z = Y xor V.
fn km_system() -> AuxiliarySystem {
    AuxiliarySystem::from_fns(
        2,
        2,
        (1, 2, 2),
        |x, _, v| if v == x { 1.0 } else { 0.0 },
        |y, _, v, z| if z == y ^ v { 1.0 } else { 0.0 },
    )
    .unwrap()
}

// I(A;B|C) from its definition as an expected log-ratio; independent of the
// entropy-difference route used by the library.
fn cmi_by_definition(joint: &JointPmf<f64>, a: &[usize], b: &[usize], c: &[usize]) -> f64 {
    let shape = joint.shape().to_vec();
    let project = |idx: &[usize], axes: &[usize]| -> Vec<usize> { axes.iter().map(|&k| idx[k]).collect() };
    let mut tables: Vec<std::collections::HashMap<Vec<usize>, f64>> = vec![Default::default(); 4];
    let mut sets: Vec<Vec<usize>> = vec![a.iter().chain(c).copied().collect(), b.iter().chain(c).copied().collect()];
    sets.push(a.iter().chain(b).chain(c).copied().collect());
    sets.push(c.to_vec());
    let mut idx = vec![0usize; shape.len()];
    let mut entries = Vec::new();
    for &p in joint.probs() {
        for (t, s) in tables.iter_mut().zip(&sets) {
            *t.entry(project(&idx, s)).or_default() += p;
        }
        entries.push((idx.clone(), p));
        for ax in (0..shape.len()).rev() {
            idx[ax] += 1;
            if idx[ax] < shape[ax] {
                break;
            }
            idx[ax] = 0;
        }
    }
    let mut total = 0.0;
    for (idx, p) in entries {
        if p <= 0.0 {
            continue;
        }
        let g = |k: usize| tables[k][&project(&idx, &sets[k])];
        total += p * ((g(2) * g(3)) / (g(0) * g(1))).log2();
    }
    total
}

fn random_source(rng: &mut ChaCha8Rng, nx: usize, ny: usize) -> JointSource {
    let k = search::random_kernel(1, nx * ny, false, rng);
    JointSource::new(nx, ny, k.row(0).to_vec()).unwrap()
}

fn random_dist(rng: &mut ChaCha8Rng, nx: usize, ny: usize, nz: usize) -> DistortionFn {
    use rand::Rng;
    DistortionFn::new(nx, ny, nz, (0..nx * ny * nz).map(|_| rng.random::<f64>()).collect()).unwrap()
}

fn random_aux(rng: &mut ChaCha8Rng, nx: usize, ny: usize, cards: (usize, usize, usize)) -> AuxiliarySystem {
    let (nu, nv, nz) = cards;
    AuxiliarySystem::new(
        nu,
        nv,
        nz,
        search::random_kernel(nx, nu * nv, false, rng),
        search::random_kernel(ny * nu * nv, nz, false, rng),
    )
    .unwrap()
}

#[test]
fn degenerate_system_costs_nothing() {
    let src = dsbs(0.11);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let dist = random_dist(&mut rng, 2, 2, 3);
    let z0 = 2;
    let aux = AuxiliarySystem::from_fns(2, 2, (1, 1, 3), |_, _, _| 1.0, |_, _, _, z| if z == z0 { 1.0 } else { 0.0 })
        .unwrap();
    let t = evaluate_inner_point(&src, &dist, &aux).unwrap();
    let expect: f64 = (0..2).flat_map(|x| (0..2).map(move |y| (x, y))).map(|(x, y)| src.p(x, y) * dist.get(x, y, z0)).sum();
    assert_eq!((t.r1, t.r2), (0.0, 0.0));
    assert!((t.d - expect).abs() < 1e-15);
}

#[test]
fn korner_marton_inner_point() {
    let t = evaluate_inner_point(&dsbs(0.11), &xor_hamming(), &km_system()).unwrap();
    let h = binary_entropy(0.11).unwrap();
    assert!((t.r1 - h).abs() < 1e-12);
    assert!((t.r2 - h).abs() < 1e-12);
    assert_eq!(t.d, 0.0);
}

#[test]
fn korner_marton_cmi_on_joint() {
    // I(X;V|Y) on the induced five-variable joint equals H(X|Y) = h(0.11)
    let joint = km_system().joint(&dsbs(0.11)).unwrap();
    let v = crate::model::conditional_mutual_information(&joint, &[AX_X], &[AX_V], &[AX_Y]).unwrap();
    assert!((v - binary_entropy(0.11).unwrap()).abs() < 1e-12);
}

#[test]
fn forwarding_system_matches_definition() {
    // fixed 2x2 source, U = noisy copy of X with |U| = 2, V trivial, Z = noisy function of (Y, U)
    let src = JointSource::from_rows(&[vec![0.3, 0.2], vec![0.1, 0.4]]).unwrap();
    let dist = DistortionFn::hamming_to(2, 2, 2, |x, y| x & y).unwrap();
    let aux = AuxiliarySystem::from_fns(
        2,
        2,
        (2, 1, 2),
        |x, u, _| if u == x { 0.85 } else { 0.15 },
        |y, u, _, z| if z == (y & u) { 0.9 } else { 0.1 },
    )
    .unwrap();
    let t = evaluate_inner_point(&src, &dist, &aux).unwrap();
    let joint = aux.joint(&src).unwrap();
    let r1 = cmi_by_definition(&joint, &[AX_X], &[AX_U], &[AX_Y]);
    let r2 = cmi_by_definition(&joint, &[AX_X], &[AX_U], &[]) + cmi_by_definition(&joint, &[AX_Y], &[AX_Z], &[AX_U]);
    assert!((t.r1 - r1).abs() < 1e-12, "{} vs {r1}", t.r1);
    assert!((t.r2 - r2).abs() < 1e-12, "{} vs {r2}", t.r2);
}

#[test]
fn outer_examples() {
    let src = dsbs(0.11);
    let h = binary_entropy(0.11).unwrap();
    let copy_x = OuterSystem::new(
        2,
        2,
        Kernel::deterministic(2, 2, |x| x).unwrap(),
        Kernel::deterministic(4, 2, |yu| (yu / 2) ^ (yu % 2)).unwrap(),
    )
    .unwrap();
    let t = evaluate_outer_point(&src, &xor_hamming(), &copy_x).unwrap();
    assert!((t.r1 - h).abs() < 1e-12 && (t.r2 - h).abs() < 1e-12 && t.d == 0.0);

    let constant = OuterSystem::new(1, 2, Kernel::constant_rows(2, &[1.0]).unwrap(), Kernel::deterministic(2, 2, |_| 1).unwrap()).unwrap();
    let t = evaluate_outer_point(&src, &xor_hamming(), &constant).unwrap();
    assert_eq!((t.r1, t.r2), (0.0, 0.0));
    assert!((t.d - 0.89).abs() < 1e-12);

    // U = X, Z = f(X, Y) = x + y on a 2x3 source gives (H(X|Y), H(f), 0)
    let src = JointSource::from_rows(&[vec![0.1, 0.2, 0.15], vec![0.25, 0.05, 0.25]]).unwrap();
    let dist = DistortionFn::hamming_to(2, 3, 4, |x, y| x + y).unwrap();
    let sys = OuterSystem::new(
        2,
        4,
        Kernel::deterministic(2, 2, |x| x).unwrap(),
        Kernel::deterministic(6, 4, |yu| yu / 2 + yu % 2).unwrap(),
    )
    .unwrap();
    let t = evaluate_outer_point(&src, &dist, &sys).unwrap();
    let h_xy = crate::model::entropy(src.probs()).unwrap();
    let h_y = crate::model::entropy(&src.marginal_y()).unwrap();
    let h_f = FunctionTable::from_fn(2, 3, |x, y| x + y).entropy(&src).unwrap();
    assert!((t.r1 - (h_xy - h_y)).abs() < 1e-12);
    assert!((t.r2 - h_f).abs() < 1e-12);
    assert_eq!(t.d, 0.0);
}

#[test]
fn inconsistent_alphabets_rejected() {
    let src = dsbs(0.2);
    let dist3 = DistortionFn::hamming_to(2, 2, 3, |x, _| x).unwrap();
    assert!(evaluate_inner_point(&src, &dist3, &km_system()).is_err());
    let big = JointSource::from_rows(&[vec![0.2, 0.1, 0.1], vec![0.2, 0.2, 0.2]]).unwrap();
    let dist = DistortionFn::hamming_to(2, 3, 2, |x, _| x).unwrap();
    assert!(evaluate_inner_point(&big, &dist, &km_system()).is_err());
    assert!(AuxiliarySystem::new(2, 2, 2, Kernel::constant_rows(2, &[1.0, 0.0, 0.0]).unwrap(), Kernel::constant_rows(8, &[1.0, 0.0]).unwrap()).is_err());
}

#[test]
fn fast_evaluators_agree_with_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let (nx, ny) = (2 + rng.random_range(0..2), 2 + rng.random_range(0..2));
        use rand::Rng;
        let cards = (1 + rng.random_range(0..3), 1 + rng.random_range(0..3), 2 + rng.random_range(0..2));
        let src = random_source(&mut rng, nx, ny);
        let dist = random_dist(&mut rng, nx, ny, cards.2);
        let aux = random_aux(&mut rng, nx, ny, cards);
        let a = evaluate_inner_point(&src, &dist, &aux).unwrap();
        let b = InnerEvaluator::new(&src, &dist, cards).eval(&aux);
        assert!((a.r1 - b.r1).abs() < 1e-12 && (a.r2 - b.r2).abs() < 1e-12 && (a.d - b.d).abs() < 1e-12);

        let outer = OuterSystem::from_inner(&aux);
        let a = evaluate_outer_point(&src, &dist, &outer).unwrap();
        let b = OuterEvaluator::new(&src, &dist, (outer.size_u(), outer.size_z())).eval(&outer);
        assert!((a.r1 - b.r1).abs() < 1e-12 && (a.r2 - b.r2).abs() < 1e-12 && (a.d - b.d).abs() < 1e-12);
    }
}

#[test]
fn time_sharing_gives_the_midpoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let src = random_source(&mut rng, 2, 3);
    let dist = random_dist(&mut rng, 2, 3, 2);
    let a = random_aux(&mut rng, 2, 3, (2, 3, 2));
    let b = random_aux(&mut rng, 2, 3, (1, 2, 2));
    let ta = evaluate_inner_point(&src, &dist, &a).unwrap();
    let tb = evaluate_inner_point(&src, &dist, &b).unwrap();
    for w in [0.0, 0.3, 0.5, 1.0] {
        let mix = AuxiliarySystem::time_share(&a, &b, w).unwrap();
        let tm = evaluate_inner_point(&src, &dist, &mix).unwrap();
        assert!((tm.r1 - (w * ta.r1 + (1.0 - w) * tb.r1)).abs() < 1e-12);
        assert!((tm.r2 - (w * ta.r2 + (1.0 - w) * tb.r2)).abs() < 1e-12);
        assert!((tm.d - (w * ta.d + (1.0 - w) * tb.d)).abs() < 1e-12);
    }
    assert!(AuxiliarySystem::time_share(&a, &b, 1.5).is_err());
}

#[test]
fn pareto_prune_removes_dominated() {
    let p = |r1, r2, d| FrontierPoint { triple: RateDistortionTriple { r1, r2, d }, witness: Witness::Inner(km_system()) };
    let kept = pareto_prune(vec![p(1.0, 1.0, 0.0), p(1.0, 1.0, 0.0), p(2.0, 2.0, 0.0), p(0.5, 3.0, 0.0), p(0.0, 0.0, 1.0), p(1.0, 1.0, 0.5)]);
    let triples: Vec<_> = kept.iter().map(|k| (k.triple.r1, k.triple.r2, k.triple.d)).collect();
    assert_eq!(triples, vec![(0.0, 0.0, 1.0), (0.5, 3.0, 0.0), (1.0, 1.0, 0.0)]);
}

#[test]
fn zero_budget_is_rejected() {
    let src = dsbs(0.11);
    let d = xor_hamming();
    assert!(matches!(optimize_inner_frontier(&src, &d, (1, 2, 2), &SearchBudget::new(0, 10, 1)), Err(Error::ZeroBudget(_))));
    assert!(matches!(optimize_outer_frontier(&src, &d, (2, 2), &SearchBudget::new(3, 0, 1)), Err(Error::ZeroBudget(_))));
    assert!(optimize_inner_frontier(&src, &d, (1, 2, 3), &SearchBudget::new(1, 10, 1)).is_err());
}

#[test]
fn identical_source_needs_no_first_link() {
    let src = JointSource::from_rows(&[vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
    let dist = DistortionFn::hamming_to(2, 2, 2, |x, _| x).unwrap();
    let budget = SearchBudget::new(4, 2000, 7).with_targets(vec![0.0]);
    let f = optimize_inner_frontier(&src, &dist, (4, 4, 2), &budget).unwrap();
    assert!(f.slice(0.0).any(|p| p.triple.r1 <= 1e-6 && (p.triple.r2 - 1.0).abs() <= 1e-3));
}

#[test]
fn search_is_deterministic_and_pareto() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let src = random_source(&mut rng, 2, 2);
    let dist = random_dist(&mut rng, 2, 2, 2);
    let budget = SearchBudget::new(2, 600, 42);
    let a = optimize_inner_frontier(&src, &dist, (2, 2, 2), &budget).unwrap();
    let b = optimize_inner_frontier(&src, &dist, (2, 2, 2), &budget).unwrap();
    assert_eq!(a, b);
    for (i, p) in a.points.iter().enumerate() {
        for (j, q) in a.points.iter().enumerate() {
            if i != j {
                assert!(!q.triple.strictly_dominates(&p.triple));
                assert!(!q.triple.weakly_dominates(&p.triple));
            }
        }
        // witnesses reproduce their triples
        let Witness::Inner(sys) = &p.witness else { panic!("inner witness expected") };
        let t = evaluate_inner_point(&src, &dist, sys).unwrap();
        assert!((t.r1 - p.triple.r1).abs() < 1e-12 && (t.r2 - p.triple.r2).abs() < 1e-12);
    }
    let json = serde_json::to_string(&a).unwrap();
    let back: RegionFrontier = serde_json::from_str(&json).unwrap();
    assert_eq!(back.points.len(), a.points.len());
    let o = optimize_outer_frontier(&src, &dist, (3, 2), &budget).unwrap();
    assert!(o.heuristic_minimum && !a.heuristic_minimum);
    assert!(a.to_csv().starts_with("r1,r2,d,kind,seed\n"));
}

#[test]
fn markov_examples() {
    let src = dsbs(0.11);
    let h = binary_entropy(0.11).unwrap();
    let z_is_x = Kernel::deterministic(2, 2, |x| x).unwrap();
    let k = MarkovChain::YXZ.expand(&src, &z_is_x).unwrap();
    let (r1, r2) = markov_rates(&src, MarkovChain::YXZ, &k).unwrap();
    assert!((r1 - h).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);

    let z_is_y = MarkovChain::XYZ.expand(&src, &Kernel::deterministic(2, 2, |y| y).unwrap()).unwrap();
    let (r1, r2) = markov_rates(&src, MarkovChain::XYZ, &z_is_y).unwrap();
    assert!(r1 == 0.0 && (r2 - 1.0).abs() < 1e-12);

    let indep = MarkovChain::YXZ.expand(&src, &Kernel::constant_rows(2, &[0.3, 0.7]).unwrap()).unwrap();
    let (r1, r2) = markov_rates(&src, MarkovChain::YXZ, &indep).unwrap();
    assert!(r1.abs() < 1e-12 && r2.abs() < 1e-12);

    // a kernel that follows x violates X - Y - Z
    assert!(markov_rates(&src, MarkovChain::XYZ, &k).is_err());
    assert!(markov_rates(&src, MarkovChain::YXZ, &z_is_y).is_err());
}

#[test]
fn markov_witness_reproduces_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10 {
        let src = random_source(&mut rng, 3, 2);
        let kz = search::random_kernel(3, 3, false, &mut rng);
        let dist = random_dist(&mut rng, 3, 2, 3);
        let (r1, r2) = markov_rates(&src, MarkovChain::YXZ, &MarkovChain::YXZ.expand(&src, &kz).unwrap()).unwrap();
        let t = evaluate_inner_point(&src, &dist, &markov_inner_witness(&src, &kz).unwrap()).unwrap();
        assert!((t.r1 - r1).abs() < 1e-10 && (t.r2 - r2).abs() < 1e-10);
    }
}

#[test]
fn lossless_examples() {
    let budget = SearchBudget::new(4, 3000, 1);
    let src = dsbs(0.11);
    let h = binary_entropy(0.11).unwrap();
    let t = lossless_function_rates(&src, &FunctionTable::from_fn(2, 2, |x, y| x ^ y), &budget).unwrap();
    assert!((t.r1 - h).abs() < 5e-3 && (t.r2 - h).abs() < 5e-3, "{t:?}");

    let t = lossless_function_rates(&src, &FunctionTable::from_fn(2, 2, |_, y| y), &budget).unwrap();
    assert!(t.r1 < 1e-6 && (t.r2 - 1.0).abs() < 1e-9, "{t:?}");

    let same = JointSource::from_rows(&[vec![0.3, 0.0], vec![0.0, 0.7]]).unwrap();
    let t = lossless_function_rates(&same, &FunctionTable::from_fn(2, 2, |x, _| x), &budget).unwrap();
    let hx = binary_entropy(0.3).unwrap();
    assert!(t.r1 < 1e-6 && (t.r2 - hx).abs() < 1e-9, "{t:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // With U trivial and Z = f(X, Y) computed from (Y, V): I(Y,V;Z) = H(Z) = I(X,Y;Z).
    #[test]
    fn function_identity(seed in 0u64..10_000) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let src = random_source(&mut rng, 3, 2);
        // V = X, optionally through a random relabeling
        let perm: Vec<usize> = { let mut p = vec![0, 1, 2]; p.swap(0, rng.random_range(0..3)); p };
        let table: Vec<usize> = (0..6).map(|_| rng.random_range(0..3)).collect();
        let f = |x: usize, y: usize| table[x * 2 + y];
        let inv = |v: usize| perm.iter().position(|&p| p == v).unwrap();
        let aux = AuxiliarySystem::from_fns(3, 2, (1, 3, 3),
            |x, _, v| if v == perm[x] { 1.0 } else { 0.0 },
            |y, _, v, z| if z == f(inv(v), y) { 1.0 } else { 0.0 }).unwrap();
        let joint = aux.joint(&src).unwrap();
        let i_yv_z = crate::model::conditional_mutual_information(&joint, &[AX_Y, AX_V], &[AX_Z], &[]).unwrap();
        let i_xy_z = crate::model::conditional_mutual_information(&joint, &[AX_X, AX_Y], &[AX_Z], &[]).unwrap();
        let h_z = joint.entropy_of(&[AX_Z]).unwrap();
        prop_assert!((i_yv_z - h_z).abs() < 1e-10);
        prop_assert!((i_xy_z - h_z).abs() < 1e-10);
    }

    // Viewing an inner system as an outer one never raises the rates.
    #[test]
    fn inner_embeds_into_outer(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let src = random_source(&mut rng, 2, 3);
        let dist = random_dist(&mut rng, 2, 3, 2);
        let aux = random_aux(&mut rng, 2, 3, (2, 2, 2));
        let i = evaluate_inner_point(&src, &dist, &aux).unwrap();
        let o = evaluate_outer_point(&src, &dist, &OuterSystem::from_inner(&aux)).unwrap();
        prop_assert!((o.r1 - i.r1).abs() < 1e-12);
        prop_assert!(o.r2 <= i.r2 + 1e-12);
        prop_assert!((o.d - i.d).abs() < 1e-12);
    }
}
