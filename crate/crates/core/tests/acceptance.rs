//! End-to-end checks of the toolkit's headline guarantees.
//!
//! Runs without the libtest harness so every criterion prints its own
//! PASS/FAIL line. The process fails when a criterion fails unless it is
//! listed in `UNATTAINABLE`, and also when a listed criterion starts
//! passing.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use lipgame::analysis::{
    enumerate_minmax_fair, is_strict_pareto, sorted_lex_minimizers, strong_poa, strong_pos, Norm, Price,
};
use lipgame::congestion::{build_game, phi_pi, psi_facility, upsilon, BottleneckGame};
use lipgame::dynamics::{improvement_graph, longest_path_length};
use lipgame::fixtures;
use lipgame::game::{enumerate_sne, improving_moves, is_pne, is_sne};
use lipgame::generate::{self, CongestionShape, RoutingCosts};
use lipgame::lexorder::{a_lex_compare, sorted_lex_cmp, a_lex_cmp, PairVector};
use lipgame::potential::{compute_exponent, path_bound, power_sum, verify_lip};
use lipgame::rational::{self, int, ratio, Rational};
use lipgame::routing::{sne_convex_costs, sne_identical_costs};
use lipgame::splittable::{
    alpha_exponent, alpha_potential, approx_sne, lip_certificates, private_costs, random_state,
    sample_improving_move, verify_alpha_unilateral, SolverConfig, SplittableInstance, SplittableState,
};
use lipgame::MoveMode;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Criteria whose statement is refuted by counterexample; see the README.
const UNATTAINABLE: &[usize] = &[4];

const RANDOM_GAMES: usize = 200;
const GAME_SEED: u64 = 0x11e;

type Check = fn() -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }
}

fn random_games() -> Vec<BottleneckGame> {
    let mut rng = ChaCha8Rng::seed_from_u64(GAME_SEED);
    (0..RANDOM_GAMES)
        .map(|_| generate::bottleneck_game(CongestionShape::default(), &mut rng))
        .collect()
}

fn lip_certification() -> Outcome {
    let start = Instant::now();
    let mut moves = 0u64;
    let mut failures = Vec::new();
    for (k, b) in random_games().iter().enumerate() {
        let n = b.model().players();
        for phi in [phi_pi(b), psi_facility(b)] {
            let v = verify_lip(b.game(), &phi, n).expect("verification fits the budget");
            moves += v.moves_checked;
            if !v.holds {
                failures.push(format!("game {k} {}", phi.name()));
            }
        }
    }
    let elapsed = start.elapsed();
    Outcome::new(
        failures.is_empty() && elapsed < Duration::from_secs(60),
        format!(
            "{RANDOM_GAMES} games, {moves} moves, {} counterexamples, {:.1}s",
            failures.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn negative_control() -> Outcome {
    let b = build_game(fixtures::upsilon_counter());
    let ups = upsilon(&b);
    let v = verify_lip(b.game(), &ups, 2).expect("tiny game");
    let Some(cx) = v.counterexample else {
        return Outcome::new(false, "no counterexample found");
    };
    let (from, to) = (cx.from.0.clone(), cx.to.0.clone());
    let exact_move = from == [0, 0] && to == [1, 0] && cx.coalition == [0];
    let nu_before = ups.eval(&from);
    let nu_after = ups.eval(&to);
    let nu_ok = nu_before == [int(10), int(0)] && nu_after == [int(10), int(1)];
    let pairs = |x: &[usize]| {
        let costs = b.model().facility_costs(x);
        let users = b.model().user_sets(x);
        PairVector::new(
            costs
                .into_iter()
                .zip(users)
                .map(|(c, u)| (c, Rational::from_integer((u.len() as i64).into())))
                .collect(),
        )
        .expect("finite pairs")
    };
    let decreasing = a_lex_compare(&pairs(&to), &pairs(&from)).expect("same length") == Ordering::Less;
    Outcome::new(
        exact_move && nu_ok && decreasing,
        format!(
            "move {:?}->{:?} by {:?}; nu {:?} vs {:?}; pair order decreasing: {decreasing}",
            from,
            to,
            cx.coalition,
            nu_before.iter().map(rational::format).collect::<Vec<_>>(),
            nu_after.iter().map(rational::format).collect::<Vec<_>>(),
        ),
    )
}

fn potential_soundness() -> Outcome {
    let mut edges = 0usize;
    let mut failures = Vec::new();
    let mut max_exponent = 0;
    for (k, b) in random_games().iter().enumerate() {
        let g = b.game();
        let n = g.players();
        let spec = compute_exponent(g, &phi_pi(b), n).expect("pi has the LIP");
        max_exponent = max_exponent.max(spec.exponent);
        let graph = improvement_graph(g, n).expect("graph fits the budget");
        let space = g.space().expect("space fits the budget");
        let potential: Vec<Rational> = (0..space.len())
            .map(|i| power_sum(&spec.phi.eval(&space.decode(i)), spec.exponent))
            .collect();
        for (u, v) in graph.edges() {
            edges += 1;
            if potential[v] >= potential[u] {
                failures.push(format!("game {k}: edge {u}->{v} does not decrease"));
                break;
            }
        }
        if !graph.is_acyclic() {
            failures.push(format!("game {k}: cycle"));
            continue;
        }
        let longest = longest_path_length(&graph).expect("acyclic");
        if num_bigint::BigUint::from(longest) > path_bound(&spec) {
            failures.push(format!("game {k}: longest path {longest} above bound"));
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!(
            "{edges} edges, largest exponent {max_exponent}, {} failures {:?}",
            failures.len(),
            failures.iter().take(3).collect::<Vec<_>>()
        ),
    )
}

fn fairness_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(GAME_SEED + 4);
    let (mut equal, mut subset, mut fair_nonempty_equal, mut pareto) = (0, 0, 0, 0);
    let mut first_gap = None;
    const GAMES: usize = 100;
    for k in 0..GAMES {
        let g = generate::normal_form(9, &mut rng);
        let fair = enumerate_minmax_fair(&g).expect("small game");
        let lex = sorted_lex_minimizers(&g).expect("small game");
        if fair == lex {
            equal += 1;
        } else if first_gap.is_none() {
            first_gap = Some(format!("game {k}: {} fair vs {} minimizers", fair.len(), lex.len()));
        }
        subset += usize::from(fair.iter().all(|x| lex.contains(x)));
        fair_nonempty_equal += usize::from(fair.is_empty() || fair == lex);
        pareto += usize::from(
            fair.iter().chain(&lex).all(|x| is_strict_pareto(&g, x).expect("small game")),
        );
    }
    Outcome::new(
        equal == GAMES && pareto == GAMES,
        format!(
            "sets equal on {equal}/{GAMES}; fair within minimizers on {subset}/{GAMES}; \
             fair empty or equal on {fair_nonempty_equal}/{GAMES}; strict Pareto on {pareto}/{GAMES}; first gap: {}",
            first_gap.unwrap_or_else(|| "none".into())
        ),
    )
}

fn efficiency() -> Outcome {
    let mut failures = Vec::new();
    let mut single = 0;
    for (k, b) in random_games().iter().enumerate() {
        let g = b.game();
        let n = g.players();
        let inf = strong_pos(g, Norm::Inf).expect("SNE exist");
        if inf != Price::Exact(Rational::one()) {
            failures.push(format!("game {k}: PoS(inf) = {inf:?}"));
        }
        let l1 = strong_pos(g, Norm::L1).expect("SNE exist");
        let l2 = strong_pos(g, Norm::Lp(2)).expect("SNE exist");
        if n == 1 {
            // a lone player's best response is the optimum
            single += 1;
            if l1 != Price::Exact(Rational::one()) {
                failures.push(format!("game {k}: single player PoS(L1) = {l1:?}"));
            }
            continue;
        }
        let bound = Rational::from_integer((n as i64).into());
        match &l1 {
            Price::Exact(r) if *r < bound => {}
            other => failures.push(format!("game {k}: PoS(L1) = {other:?} with n = {n}")),
        }
        if l2.to_f64() >= n as f64 {
            failures.push(format!("game {k}: PoS(L2) = {l2:?} with n = {n}"));
        }
    }
    let root = fixtures::example_root(3, int(1), ratio(1, 100));
    let root_pos = strong_pos(&root, Norm::L1).expect("root has an SNE");
    let root_ok = root_pos == Price::Exact(ratio(297, 100));
    let poa = strong_poa(&fixtures::poa_unbounded(int(5)), Norm::L1).expect("SNE exist");
    let poa_ok = poa == Price::Unbounded;
    Outcome::new(
        failures.is_empty() && root_ok && poa_ok,
        format!(
            "{RANDOM_GAMES} games ({single} single-player), {} failures; root PoS(L1) = {}; unbounded PoA flagged: {poa_ok}",
            failures.len(),
            match root_pos {
                Price::Exact(r) => rational::format(&r),
                other => format!("{other:?}"),
            }
        ),
    )
}

fn routing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(GAME_SEED + 6);
    let mut failures = Vec::new();
    const INSTANCES: usize = 60;
    for k in 0..INSTANCES {
        for costs in [RoutingCosts::Identical, RoutingCosts::Convex] {
            let inst = generate::routing_dag(costs, 100_000, &mut rng);
            let game = build_game(inst.to_model().expect("paths fit")).into_game();
            let mut solutions = vec![("convex", sne_convex_costs(&inst))];
            if costs == RoutingCosts::Identical {
                solutions.push(("identical", sne_identical_costs(&inst)));
            }
            for (name, sol) in solutions {
                match sol {
                    Ok(s) if is_sne(&game, &s.profile).expect("small game") => {}
                    Ok(s) => failures.push(format!("instance {k}: {name} output {:?} is not an SNE", s.profile.0)),
                    Err(e) if costs == RoutingCosts::Identical && name == "convex" => {
                        // shared tables need not be convex
                        if !e.to_string().contains("convex") {
                            failures.push(format!("instance {k}: {name} failed: {e}"));
                        }
                    }
                    Err(e) => failures.push(format!("instance {k}: {name} failed: {e}")),
                }
            }
        }
    }

    let zig = fixtures::routing_pne_not_sne();
    let zig_game = build_game(zig.to_model().expect("small")).into_game();
    let x = zig.profile_of(&fixtures::zigzag_paths()).expect("paths exist");
    let pair_move = improving_moves(&zig_game, &x, 2, MoveMode::Strict)
        .expect("small")
        .iter()
        .any(|m| m.coalition.len() == 2);
    let zig_ok = is_pne(&zig_game, &x).expect("small") && !is_sne(&zig_game, &x).expect("small") && pair_move;
    let zig_solver = sne_convex_costs(&zig).is_ok_and(|s| is_sne(&zig_game, &s.profile).expect("small"));

    let multi = fixtures::routing_multi_sne(3);
    let multi_game = build_game(multi.to_model().expect("small")).into_game();
    let totals: BTreeSet<Rational> = enumerate_sne(&multi_game)
        .expect("small")
        .iter()
        .map(|x| multi_game.costs(x).expect("valid").into_iter().sum())
        .collect();
    let totals_ok = totals == BTreeSet::from([int(1), int(3)]);

    Outcome::new(
        failures.is_empty() && zig_ok && zig_solver && totals_ok,
        format!(
            "{} DAG instances, {} failures {:?}; zig-zag PNE-not-SNE: {zig_ok}; convex solver on zig-zag: {zig_solver}; SNE totals {:?}",
            2 * INSTANCES,
            failures.len(),
            failures.iter().take(3).collect::<Vec<_>>(),
            totals.iter().map(rational::format).collect::<Vec<_>>()
        ),
    )
}

fn sorted_decrease(before: &[Rational], after: &[Rational]) -> bool {
    sorted_lex_cmp(after, before).expect("same length") == Ordering::Less
}

fn splittable_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(GAME_SEED + 7);
    const INSTANCES: usize = 20;
    const MOVES: usize = 200;
    let alpha = ratio(1, 2);
    let (mut strict_moves, mut alpha_moves) = (0usize, 0usize);
    let mut failures = Vec::new();
    for k in 0..INSTANCES {
        let inst = generate::splittable(&mut rng);
        let m = alpha_exponent(&inst, &alpha).expect("alpha is positive");
        let floor = rational::pow(&(&alpha / int(2)), m);
        for _ in 0..MOVES {
            let x = random_state(&inst, 8, &mut rng);
            if let Some((_, y)) = sample_improving_move(&inst, &x, &Rational::zero(), 20, &mut rng) {
                strict_moves += 1;
                let (cx, cy) = (lip_certificates(&inst, &x), lip_certificates(&inst, &y));
                if !sorted_decrease(&cx.phi, &cy.phi) {
                    failures.push(format!("instance {k}: phi"));
                }
                if !sorted_decrease(&cx.psi, &cy.psi) {
                    failures.push(format!("instance {k}: psi"));
                }
                if a_lex_cmp(&cy.alex, &cx.alex).expect("same length") != Ordering::Less {
                    failures.push(format!("instance {k}: pairs"));
                }
            }
            if let Some((_, y)) = sample_improving_move(&inst, &x, &alpha, 20, &mut rng) {
                alpha_moves += 1;
                let drop = alpha_potential(&inst, &x, m) - alpha_potential(&inst, &y, m);
                if drop < floor {
                    failures.push(format!("instance {k}: alpha potential drop below (alpha/2)^{m}"));
                }
            }
        }
    }

    let disc = fixtures::splittable_discontinuity();
    let state = |eps: Rational| SplittableState { xi: vec![vec![Rational::one() - &eps, eps]] };
    let pis: Vec<Rational> = ["1/10", "1/1000", "1/1000000", "0"]
        .iter()
        .map(|e| private_costs(&disc, &state(rational::parse(e).expect("literal")))[0].clone())
        .collect();
    let disc_ok = pis == [int(2), int(2), int(2), int(1)];

    Outcome::new(
        failures.is_empty() && strict_moves > 0 && alpha_moves > 0 && disc_ok,
        format!(
            "{strict_moves} strict moves, {alpha_moves} alpha moves over {INSTANCES} instances, {} failures {:?}; \
             discontinuity pi = {:?}",
            failures.len(),
            failures.iter().take(3).collect::<Vec<_>>(),
            pis.iter().map(rational::format).collect::<Vec<_>>()
        ),
    )
}

fn approximate_sne() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(GAME_SEED + 8);
    let alpha = ratio(1, 10);
    let cfg = SolverConfig::default();
    let mut failures = Vec::new();
    let mut worst_gap: f64 = 0.0;
    const INSTANCES: usize = 20;
    for k in 0..INSTANCES {
        let inst = generate::convex_parallel_links(&mut rng);
        match approx_sne(&inst, &alpha, &cfg) {
            Ok(report) => {
                worst_gap = worst_gap.max(report.final_gap);
                let check = verify_alpha_unilateral(&inst, &report.state, 0.1, &cfg.verify);
                if !check.ok || !report.verified() {
                    failures.push(format!("instance {k}: violation {:?}", check.violation));
                }
            }
            Err(e) => failures.push(format!("instance {k}: {e}")),
        }
    }
    let links = SplittableInstance::parallel_links(
        vec![
            lipgame::splittable::PwlCost::affine(int(1), int(0), int(1)).expect("valid"),
            lipgame::splittable::PwlCost::affine(int(1), int(0), int(1)).expect("valid"),
        ],
        vec![int(1)],
    )
    .expect("valid");
    let split = approx_sne(&links, &alpha, &cfg).expect("convex instance");
    let xi = &split.state.xi[0];
    let even = (xi[0] - 0.5).abs() <= 1e-6 && (xi[1] - 0.5).abs() <= 1e-6;
    Outcome::new(
        failures.is_empty() && even && split.verified(),
        format!(
            "{INSTANCES} instances, {} failures {:?}; worst gap {worst_gap:.2e}; two-link split ({:.9}, {:.9})",
            failures.len(),
            failures.iter().take(3).collect::<Vec<_>>(),
            xi[0],
            xi[1]
        ),
    )
}

fn main() {
    let criteria: [(&str, Check); 8] = [
        ("LIP certification on random congestion models", lip_certification),
        ("negative control for the unsorted facility-cost vector", negative_control),
        ("power potential soundness and path bound", potential_soundness),
        ("min-max fairness equals sorted-lex minimality", fairness_equivalence),
        ("strong price of stability", efficiency),
        ("routing SNE algorithms", routing),
        ("splittable certificates and alpha potential", splittable_properties),
        ("alpha-approximate SNE solver", approximate_sne),
    ];
    let mut unexpected = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = i + 1;
        let start = Instant::now();
        let outcome = check();
        let verdict = if outcome.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {id} {verdict} [{name}] {} ({:.2}s)",
            outcome.detail,
            start.elapsed().as_secs_f64()
        );
        if outcome.pass == UNATTAINABLE.contains(&id) {
            unexpected.push(id);
        }
    }
    let passed = criteria.len() - UNATTAINABLE.len();
    if unexpected.is_empty() {
        println!("acceptance: {passed}/{} pass; known failures {UNATTAINABLE:?}", criteria.len());
    } else {
        println!("acceptance: unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
