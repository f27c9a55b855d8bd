use proptest::prelude::*;

use semicap_core::capacity::ConditionalEntropy;
use semicap_core::count::{
    count_admissible, count_admissible_exhaustive, count_admissible_noncyclic, WindowConvention,
};
use semicap_core::fw::ConcaveObjective;
use semicap_core::indentropy::{axial_lift, CombinatorialSearch};
use semicap_core::lattice::{
    empirical_counts, empirical_distribution, entropy, marginal, tv_distance, Alphabet,
    PatternDistribution, Shape, SiteProductMeasure, Word,
};
use semicap_core::scs::{
    is_admissible, rll_constraint, tv_distance_to_set, AxialSystem, ConstraintSet, ForbiddenSet,
    System,
};
use semicap_core::validation::{concentration_check, sample_word};

fn word_strategy() -> impl Strategy<Value = Word> {
    (1usize..=2, 2usize..=3)
        .prop_flat_map(|(dim, q)| {
            let max_side = if dim == 1 { 8 } else { 5 };
            (Just(dim), Just(q), 1usize..=max_side)
        })
        .prop_flat_map(|(dim, q, n)| {
            let cells = n.pow(dim as u32);
            prop::collection::vec(0..q as u8, cells)
                .prop_map(move |c| Word::new(dim, n, q, c).unwrap())
        })
}

/// A random shape inside `F_k^d` and a random nonempty subset of it.
fn nested_shapes(dim: usize) -> impl Strategy<Value = (Shape, Shape)> {
    let k = if dim == 1 { 4 } else { 2 };
    let cube = Shape::cube(dim, k);
    let m = cube.len();
    (
        prop::collection::vec(any::<bool>(), m),
        prop::collection::vec(any::<bool>(), m),
    )
        .prop_map(move |(outer, inner)| {
            let mut big: Vec<Vec<i64>> = Vec::new();
            let mut small: Vec<Vec<i64>> = Vec::new();
            for (i, p) in cube.points().iter().enumerate() {
                if outer[i] || i == 0 {
                    big.push(p.clone());
                    if inner[i] || i == 0 {
                        small.push(p.clone());
                    }
                }
            }
            (
                Shape::new(dim, big).unwrap(),
                Shape::new(dim, small).unwrap(),
            )
        })
}

fn distribution(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, m).prop_map(|mut v| {
        v[0] += 1e-3;
        let s: f64 = v.iter().sum();
        v.iter_mut().for_each(|x| *x /= s);
        v
    })
}

fn binary_sites(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..=1.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn marginal_of_empirical_is_empirical(
        (word, (big, small)) in word_strategy()
            .prop_flat_map(|w| { let d = w.dim(); (Just(w), nested_shapes(d)) })
    ) {
        let full = empirical_counts(&word, &big).unwrap();
        let direct = empirical_counts(&word, &small).unwrap();
        let via = full.marginal(&small).unwrap();
        prop_assert_eq!(via.counts(), direct.counts());
        prop_assert_eq!(via.total(), direct.total());
        prop_assert_eq!(direct.total(), word.num_cells() as u64);
        prop_assert_eq!(direct.counts().iter().sum::<u64>(), direct.total());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tv_contracts_under_marginals(
        (mu, nu, (big, small)) in nested_shapes(1).prop_flat_map(|(b, s)| {
            let m = 2usize.pow(b.len() as u32);
            (distribution(m), distribution(m), Just((b, s)))
        })
    ) {
        let mu = PatternDistribution::new(big.clone(), 2, mu).unwrap();
        let nu = PatternDistribution::new(big, 2, nu).unwrap();
        let before = tv_distance(&mu, &nu).unwrap();
        let after = tv_distance(&marginal(&mu, &small).unwrap(), &marginal(&nu, &small).unwrap()).unwrap();
        prop_assert!(after <= before + 1e-12);
    }

    #[test]
    fn averaged_marginal_is_translation_invariant(sites in binary_sites(6), shift in 1usize..6) {
        let mu = SiteProductMeasure::bernoulli(&sites).unwrap();
        let mut rotated = sites.clone();
        rotated.rotate_left(shift);
        let nu = SiteProductMeasure::bernoulli(&rotated).unwrap();
        let shape = Shape::new(1, vec![vec![0], vec![1], vec![3]]).unwrap();
        let a = mu.averaged_marginal(&shape).unwrap();
        let b = nu.averaged_marginal(&shape).unwrap();
        for (x, y) in a.probs().iter().zip(b.probs()) {
            prop_assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn averaged_marginal_is_translation_invariant_2d(sites in binary_sites(9)) {
        let grid = |s: &[f64]| SiteProductMeasure::new(
            2, 3, s.iter().map(|&x| vec![1.0 - x, x]).collect()).unwrap();
        // Shift by one along the first axis.
        let shifted: Vec<f64> = (0..9).map(|i| sites[(i / 3) * 3 + (i % 3 + 1) % 3]).collect();
        let shape = Shape::cube(2, 2);
        let a = grid(&sites).averaged_marginal(&shape).unwrap();
        let b = grid(&shifted).averaged_marginal(&shape).unwrap();
        for (x, y) in a.probs().iter().zip(b.probs()) {
            prop_assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn entropy_is_concave(mu in distribution(8), nu in distribution(8), lambda in 0.0f64..=1.0) {
        let s = Shape::segment(3);
        let a = PatternDistribution::new(s.clone(), 2, mu).unwrap();
        let b = PatternDistribution::new(s, 2, nu).unwrap();
        let mix = a.mix(&b, lambda).unwrap();
        prop_assert!(entropy(&mix) >= lambda * entropy(&a) + (1.0 - lambda) * entropy(&b) - 1e-12);
    }

    #[test]
    fn conditional_entropy_is_concave(a in distribution(8), b in distribution(8)) {
        let f = ConditionalEntropy::new(2, 3);
        let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
        prop_assert!(f.value(&mid) >= 0.5 * (f.value(&a) + f.value(&b)) - 1e-12);
    }

    #[test]
    fn membership_agrees_with_admissibility(
        cells in prop::collection::vec(0u8..2, 9),
        p in 0.0f64..0.5,
    ) {
        let gamma = rll_constraint(1, p).unwrap();
        let word = Word::new(1, 9, 2, cells).unwrap();
        let fr = empirical_distribution(&word, gamma.shape()).unwrap();
        let d = tv_distance_to_set(&fr, &gamma).unwrap();
        let ok = is_admissible(&word, &System::Plain(gamma), 0.0).unwrap();
        prop_assert_eq!(d <= 1e-12, ok);
    }

    #[test]
    fn strict_product_words_are_weak_admissible(
        cells in prop::collection::vec(0u8..2, 16),
        p in 0.0f64..0.6,
        eps in prop::sample::select(vec![0.0, 0.05]),
    ) {
        let gamma = rll_constraint(1, p).unwrap();
        let strict: System = AxialSystem::strict_power(gamma.clone(), 2).unwrap().into();
        let weak: System = AxialSystem::weak(gamma, 2).unwrap().into();
        let word = Word::new(2, 4, 2, cells).unwrap();
        if is_admissible(&word, &strict, eps).unwrap() {
            prop_assert!(is_admissible(&word, &weak, eps).unwrap());
        }
    }

    #[test]
    fn counts_grow_with_eps(k in 1usize..=2, p in 0.0f64..0.3, e1 in 0.0f64..0.2, e2 in 0.0f64..0.2, n in 3usize..=9) {
        prop_assume!(n > k);
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let sys: System = rll_constraint(k, p).unwrap().into();
        prop_assert!(count_admissible(n, &sys, lo).unwrap() <= count_admissible(n, &sys, hi).unwrap());
    }

    #[test]
    fn lift_preserves_rate_and_rows(sites in binary_sites(4), dim in 2usize..=3) {
        let mu = SiteProductMeasure::bernoulli(&sites).unwrap();
        let lift = axial_lift(&mu, dim).unwrap();
        prop_assert!((lift.entropy_rate() - mu.entropy_rate()).abs() < 1e-12);
        let n = 4usize;
        for v in 0..lift.sites().len() {
            let digit_sum: usize = (0..dim).map(|a| (v / n.pow(a as u32)) % n).sum();
            prop_assert_eq!(lift.site(v), mu.site(digit_sum % n));
            for axis in 0..dim {
                // One step along any axis advances the 1-D index by one.
                let stride = n.pow(axis as u32);
                let coord = (v / stride) % n;
                let next = v - coord * stride + ((coord + 1) % n) * stride;
                prop_assert_eq!(lift.site(next), mu.site((digit_sum + 1) % n));
            }
        }
    }

    #[test]
    fn sampling_is_bit_identical(seed in any::<u64>(), sites in binary_sites(7)) {
        let mu = SiteProductMeasure::bernoulli(&sites).unwrap();
        prop_assert_eq!(sample_word(&mu, seed).unwrap(), sample_word(&mu, seed).unwrap());
    }

    #[test]
    fn cyclic_count_below_noncyclic(
        patterns in prop::collection::btree_set(0u8..8, 0..4),
        n in 3usize..=10,
        shortened in any::<bool>(),
    ) {
        let pats: Vec<String> = patterns
            .iter()
            .map(|&b| format!("{}{}{}", b >> 2 & 1, b >> 1 & 1, b & 1))
            .collect();
        let refs: Vec<&str> = pats.iter().map(String::as_str).collect();
        let f = if refs.is_empty() {
            ForbiddenSet::new(Alphabet::binary(), Shape::segment(3), vec![]).unwrap()
        } else {
            ForbiddenSet::binary_1d(&refs).unwrap()
        };
        let convention = if shortened { WindowConvention::Shortened } else { WindowConvention::Tiling };
        let sys: System = f.to_constraint_set().unwrap().into();
        let cyc = count_admissible(n, &sys, 0.0).unwrap();
        let non = count_admissible_noncyclic(n, &f, convention).unwrap().count;
        prop_assert!(cyc <= non);
    }

    #[test]
    fn multichoice_uniform_measure_is_feasible(
        patterns in prop::collection::btree_set(0u8..4, 1..3),
        n in 2usize..=6,
    ) {
        let pats: Vec<String> = patterns.iter().map(|&b| format!("{}{}", b >> 1 & 1, b & 1)).collect();
        let refs: Vec<&str> = pats.iter().map(String::as_str).collect();
        let f = ForbiddenSet::binary_1d(&refs).unwrap();
        let search = CombinatorialSearch::new(std::slice::from_ref(&f), n).unwrap();
        // Some sets (e.g. {00, 11} at odd n) admit no word at all.
        let best = search.best();
        prop_assume!(best.is_ok());
        let best = best.unwrap();
        let mu = best.word.uniform_measure().unwrap();
        let gamma = f.to_constraint_set().unwrap();
        let d = tv_distance_to_set(&mu.averaged_marginal(gamma.shape()).unwrap(), &gamma).unwrap();
        prop_assert!(d <= 1e-12);
        prop_assert!((mu.entropy_rate() - best.value).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn pruned_count_matches_exhaustive(
        dim in 1usize..=2,
        k in 1usize..=2,
        p in 0.0f64..0.4,
        eps in prop::sample::select(vec![0.0, 0.02, 0.1]),
        n in 2usize..=4,
    ) {
        let gamma = rll_constraint(k, p).unwrap();
        prop_assume!(n > k);
        let sys: System = if dim == 1 {
            gamma.into()
        } else {
            AxialSystem::strict_power(gamma, 2).unwrap().into()
        };
        prop_assert_eq!(
            count_admissible(n, &sys, eps).unwrap(),
            count_admissible_exhaustive(n, &sys, eps).unwrap()
        );
    }

    #[test]
    fn concentration_monotone_in_eps(seed in any::<u64>(), x in 0.2f64..0.5) {
        let gamma = rll_constraint(1, 0.2).unwrap();
        let mu = SiteProductMeasure::bernoulli(&[x, x]).unwrap();
        let r = concentration_check(&mu, &gamma, &[0.0, 0.01, 0.05, 0.2], &[10, 20], 30, seed).unwrap();
        prop_assert!(r.monotone_in_eps);
        prop_assert!(r.rows.iter().all(|row| (0.0..=1.0).contains(&row.fraction)));
    }
}

#[test]
fn simplex_gamma_has_zero_distance() {
    let g = ConstraintSet::simplex(Alphabet::binary(), Shape::segment(2)).unwrap();
    let mu = PatternDistribution::uniform(Shape::segment(2), 2).unwrap();
    assert_eq!(tv_distance_to_set(&mu, &g).unwrap(), 0.0);
}
