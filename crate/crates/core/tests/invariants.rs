use asbpir_core::bounds::{dual_distance_bound, length_bounds, min_shortened_dual_bound};
use asbpir_core::constructions::corpus;
use asbpir_core::linalg::Matrix;
use asbpir_core::oracle::brute_force_servable;
use asbpir_core::properties::{check_bounded, max_t};
use asbpir_core::search::{find_min_length, SearchOptions, SearchStatus};
use asbpir_core::{check, field_of_order, serve, verify_plan, GeneratorMatrix, PropertyKind, Request};
use proptest::prelude::*;

use PropertyKind::*;

fn full_rank(q: u32, k: usize, n: usize, entries: &[u8]) -> Option<GeneratorMatrix> {
    let f = field_of_order(q).unwrap();
    let data: Vec<u8> = entries.iter().map(|&x| x % q as u8).collect();
    GeneratorMatrix::new(Matrix::new(f, k, n, data).unwrap()).ok()
}

fn matrix_strategy(q: u32, max_k: usize, max_n: usize) -> impl Strategy<Value = GeneratorMatrix> {
    (1..=max_k)
        .prop_flat_map(move |k| (Just(k), k..=max_n))
        .prop_flat_map(move |(k, n)| (Just(k), Just(n), prop::collection::vec(any::<u8>(), k * n)))
        .prop_filter_map("rank deficient", move |(k, n, e)| full_rank(q, k, n, &e))
}

fn small_enough(g: &GeneratorMatrix) -> bool {
    (g.field().order() as u64).pow(g.k() as u32) <= 64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn serve_matches_brute_force(g in matrix_strategy(2, 3, 7), picks in prop::collection::vec((any::<u8>(), 1usize..=3), 1..=3)) {
        let k = g.k();
        let mut units = Vec::new();
        for &(code, m) in &picks {
            let v: Vec<u8> = (0..k).map(|i| code >> i & 1).collect();
            for _ in 0..m {
                units.push(v.clone());
            }
        }
        units.truncate(3);
        let req = Request::from_units(units).unwrap();
        let plan = serve(&g, &req).unwrap();
        prop_assert_eq!(plan.is_some(), brute_force_servable(&g, &req));
        if let Some(plan) = plan {
            prop_assert!(verify_plan(&g, &req, &plan));
        }
    }

    #[test]
    fn invariant_under_invertible_left_multiplication(
        q in prop::sample::select(vec![2u32, 3]),
        seed in any::<[u8; 16]>(),
        m_entries in prop::collection::vec(any::<u8>(), 9),
        t in 1usize..=3,
    ) {
        let Some(g) = full_rank(q, 3, 6, &[seed.as_slice(), &seed[..2]].concat()) else { return Ok(()) };
        let f = g.field();
        let m = Matrix::new(f, 3, 3, m_entries.iter().map(|&x| x % q as u8).collect()).unwrap();
        prop_assume!(m.rank() == 3);
        let mg = g.left_multiply(&m).unwrap();
        for kind in [Aspir, Asbatch, Fpir, Fbatch] {
            prop_assert_eq!(check(&g, kind, t).unwrap().holds, check(&mg, kind, t).unwrap().holds, "{}", kind);
        }
    }

    #[test]
    fn column_scaling_preserves_every_kind(g in matrix_strategy(3, 2, 5), col in 0usize..5, t in 1usize..=3) {
        let col = col % g.n();
        let mut m = g.matrix().clone();
        for r in 0..g.k() {
            m.set(r, col, g.field().mul(2, m.get(r, col)));
        }
        let scaled = GeneratorMatrix::new(m).unwrap();
        for kind in PropertyKind::ALL {
            prop_assert_eq!(check(&g, kind, t).unwrap().holds, check(&scaled, kind, t).unwrap().holds, "{}", kind);
        }
    }

    #[test]
    fn duplicating_a_column_never_breaks_a_property(g in matrix_strategy(2, 3, 5), col in 0usize..5, t in 1usize..=3) {
        let mut cols = g.columns();
        cols.push(cols[col % g.n()].clone());
        let bigger = GeneratorMatrix::new(Matrix::from_columns(g.field(), g.k(), &cols).unwrap()).unwrap();
        for kind in PropertyKind::ALL {
            if check(&g, kind, t).unwrap().holds {
                prop_assert!(check(&bigger, kind, t).unwrap().holds, "{}", kind);
            }
        }
    }
}

/// PIR and batch are properties of the code (some generator matrix has
/// them), so they are checked on a systematic generator, whose columns
/// include every unit vector.
#[test]
fn implication_lattice_on_corpus() {
    let implied = [(Fbatch, Fpir), (Fbatch, Asbatch), (Fbatch, Batch), (Fpir, Aspir), (Asbatch, Aspir), (Asbatch, Batch), (Aspir, Pir), (Batch, Pir)];
    for (name, g) in corpus().unwrap() {
        if !small_enough(&g) {
            continue;
        }
        let sys = g.systematic_form().generator;
        for t in 1..=3 {
            let holds: Vec<(PropertyKind, bool)> = PropertyKind::ALL
                .iter()
                .map(|&k| {
                    let m = if k.is_all_symbol() || k.is_functional() { &g } else { &sys };
                    (k, check(m, k, t).unwrap().holds)
                })
                .collect();
            let get = |k| holds.iter().find(|(x, _)| *x == k).unwrap().1;
            for (strong, weak) in implied {
                assert!(!get(strong) || get(weak), "{name} t={t}: {strong} without {weak}");
            }
        }
    }
}

#[test]
fn three_all_symbol_pir_equals_batch_on_corpus() {
    for (name, g) in corpus().unwrap() {
        assert_eq!(check(&g, Aspir, 3).unwrap().holds, check(&g, Asbatch, 3).unwrap().holds, "{name}");
    }
}

/// The pigeonhole argument needs `r >= 2`: with `r = 1` the code `(1 1)` is
/// 2-all-symbol PIR with singletons but cannot serve three copies.
#[test]
fn pigeonhole_bounded_sizes_on_corpus() {
    for (name, g) in corpus().unwrap() {
        let n = g.n();
        for t in 2..=4 {
            for r in 2..=n / t {
                if check_bounded(&g, Aspir, t, r).unwrap().holds {
                    assert!(check(&g, Asbatch, t / r + 1).unwrap().holds, "{name} t={t} r={r}");
                }
            }
        }
    }
    let rep = GeneratorMatrix::from_rows(field_of_order(2).unwrap(), &[[1u32, 1]]).unwrap();
    assert!(check_bounded(&rep, Aspir, 2, 1).unwrap().holds);
    assert!(!check(&rep, Asbatch, 3).unwrap().holds);
}

#[test]
fn deleting_a_column_loses_at_most_one() {
    for (name, g) in corpus().unwrap() {
        let t = max_t(&g, Asbatch).unwrap();
        if t < 2 {
            continue;
        }
        for j in 0..g.n() {
            let keep: Vec<usize> = (0..g.n()).filter(|&i| i != j).collect();
            let Ok(h) = GeneratorMatrix::new(g.select_columns(&keep)) else { continue };
            assert!(check(&h, Asbatch, t - 1).unwrap().holds, "{name} without column {j}");
        }
    }
}

#[test]
fn observed_t_respects_dual_bounds() {
    for (name, g) in corpus().unwrap() {
        let dd = dual_distance_bound(&g);
        let shortened = min_shortened_dual_bound(&g).unwrap();
        for kind in [Aspir, Asbatch] {
            let t = max_t(&g, kind).unwrap() as u64;
            if let Ok(b) = dd {
                assert!(num_rational::Ratio::from_integer(t) <= b, "{name} {kind}: {t} > {b}");
            }
            if let Some((s, b)) = shortened {
                assert!(num_rational::Ratio::from_integer(t) <= b, "{name} {kind}: {t} > {b} at s={s}");
            }
        }
    }
}

#[test]
fn search_matches_exact_values_on_grid() {
    let mut computed = std::collections::HashMap::new();
    for q in [2u32, 3] {
        for k in 1..=5 {
            for t in 1..=4 {
                // covered by the acceptance suite, about two minutes
                if (k, t, q) == (5, 4, 3) {
                    continue;
                }
                let bounds = length_bounds(k, t, q).unwrap();
                for kind in [Aspir, Asbatch] {
                    let out = find_min_length(k, t, q, kind, &SearchOptions::default()).unwrap();
                    assert_eq!(out.status, SearchStatus::Found, "{k} {t} {q} {kind}");
                    let n = out.min_length.unwrap() as u64;
                    assert!(out.witness_verified);
                    if let Some(lo) = bounds.lower(kind) {
                        assert!(lo <= n, "{k} {t} {q} {kind}: {n} below {lo}");
                    }
                    if let Some(hi) = bounds.upper(kind) {
                        assert!(n <= hi, "{k} {t} {q} {kind}: {n} above {hi}");
                    }
                    if let Some(ex) = bounds.exact(kind) {
                        assert_eq!(n, ex, "{k} {t} {q} {kind}");
                    }
                    computed.insert((k, t, q, kind), n);
                }
            }
        }
    }
    for (&(k, t, q, kind), &n) in &computed {
        if t >= 2 {
            if let Some(&prev) = computed.get(&(k, t - 1, q, kind)) {
                assert!(prev < n, "{k} {t} {q} {kind}");
            }
        }
    }
    // t = 3 closed form, checked with floating point only here
    for k in 2..=5usize {
        let r = ((1.0 + (1.0 + 8.0 * k as f64).sqrt()) / 2.0).ceil() as u64;
        assert_eq!(computed[&(k, 3, 2, Asbatch)], k as u64 + r);
    }
}

/// Without any symmetry reduction, the first length at which some rank-k
/// matrix has the property is the first length with a canonical candidate.
/// (Above the minimum the capped canonical space can be empty: `(1 1)` is
/// 1-all-symbol PIR but repeats its only value twice.)
#[test]
fn canonical_search_is_exhaustive_on_small_cases() {
    let f = field_of_order(2).unwrap();
    for k in 1..=3usize {
        for t in 1..=3usize {
            for kind in [Aspir, Asbatch] {
                let mut brute_first = None;
                let mut canonical_first = None;
                for n in k..=5usize {
                    if brute_first.is_none() {
                        for code in 0u64..1 << (k * n) {
                            let data: Vec<u8> = (0..k * n).map(|i| (code >> i & 1) as u8).collect();
                            let Ok(g) = GeneratorMatrix::new(Matrix::new(f, k, n, data).unwrap()) else { continue };
                            if check(&g, kind, t).unwrap().holds {
                                brute_first = Some(n);
                                break;
                            }
                        }
                    }
                    if canonical_first.is_none() {
                        let opts = SearchOptions { n_start: Some(n), n_end: Some(n), ..SearchOptions::default() };
                        if find_min_length(k, t, 2, kind, &opts).unwrap().status == SearchStatus::Found {
                            canonical_first = Some(n);
                        }
                    }
                }
                assert_eq!(brute_first, canonical_first, "k={k} t={t} {kind}");
            }
        }
    }
}

/// `G''` is 4-all-symbol batch on the grid except at `k = 6` in
/// characteristic two. There the rows of `A` form `K_4`, which has no proper
/// 3-colouring, so the all-one column cannot get two disjoint recovery sets
/// inside `(I | A)` besides its two copies.
#[test]
fn gdoubleprime_four_batch_grid() {
    use asbpir_core::constructions::t4_gdoubleprime;
    use asbpir_core::recovery::Server;
    for q in [2u32, 3, 4] {
        for k in 1..=6usize {
            let g = t4_gdoubleprime(k, q).unwrap();
            let expected = !(k == 6 && q % 2 == 0);
            assert_eq!(check(&g, Asbatch, 4).unwrap().holds, expected, "k={k} q={q}");
            if !expected {
                assert_eq!(Server::new(&g).max_copies(&vec![1; k]).unwrap(), 3);
            }
        }
    }
}
