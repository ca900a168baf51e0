use lipgame::analysis::{
    efficiency as brute_efficiency, enumerate_minmax_fair, is_strict_pareto, sorted_lex_minimizers, Norm, Price,
    SocialCost,
};
use lipgame::congestion::{phi_pi, psi_facility, upsilon, BottleneckGame};
use lipgame::dynamics::{improvement_graph_with_mode, longest_path_length, run, DynamicsConfig, SelectionRule};
use lipgame::game::{enumerate_sne, enumerate_ssne, is_sne};
use lipgame::gamefile::{GameFile, LoadedGame};
use lipgame::potential::{
    compute_exponent, path_bound, range_path_bound, verify_lip_with_mode, LipFunction, LipVerdict,
};
use lipgame::rational::{self, Rational};
use lipgame::routing::{sne_convex_costs, sne_identical_costs, verify_cut_certificate, RoutingInstance};
use lipgame::splittable::{approx_sne, private_costs, SolverConfig, VerifyConfig};
use lipgame::{Budget, Error, FiniteGame, MoveMode, Profile, Result};
use serde_json::{json, Map, Value};

use crate::report::{profile, q, qs, Report};
use crate::{Common, Format, FunctionArg, ModeArg, MoveArgs, RuleArg};

struct Loaded {
    kind: &'static str,
    game: LoadedGame,
}

fn load(common: &Common) -> Result<Loaded> {
    let file = GameFile::load(&common.game)?;
    Ok(Loaded {
        kind: file.kind(),
        game: file.build()?,
    })
}

fn budget(common: &Common) -> Budget {
    Budget {
        max_profiles: common.budget,
        ..Budget::default()
    }
}

/// The finite game, plus its congestion model when there is one.
fn finite(common: &Common, loaded: &Loaded) -> Result<(FiniteGame, Option<BottleneckGame>)> {
    let b = budget(common);
    match loaded.game.bottleneck()? {
        Some(bg) => {
            let bg = bg.map_game(|g| g.with_budget(b));
            Ok((bg.game().clone(), Some(bg)))
        }
        None => Ok((loaded.game.finite()?.with_budget(b), None)),
    }
}

fn config(common: &Common, loaded: &Loaded) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("game".into(), json!(common.game.display().to_string()));
    m.insert("kind".into(), json!(loaded.kind));
    m.insert(
        "format".into(),
        json!(match common.format {
            Format::Json => "json",
            Format::Text => "text",
        }),
    );
    m.insert("budget".into(), json!(common.budget));
    m.insert("seed".into(), json!(common.seed));
    m
}

fn parse_alpha(text: &str) -> Result<Rational> {
    let a = rational::parse(text)?;
    if a <= Rational::from_integer(0.into()) {
        return Err(Error::Domain(format!("alpha must be positive, got {text}")));
    }
    Ok(a)
}

fn move_mode(mode: ModeArg, alpha: Option<&str>) -> Result<MoveMode> {
    match mode {
        ModeArg::Strict => Ok(MoveMode::Strict),
        ModeArg::WeakSsne => Ok(MoveMode::WeakSsne),
        ModeArg::Alpha => {
            let text = alpha.ok_or_else(|| Error::Domain("--mode alpha needs --alpha".into()))?;
            Ok(MoveMode::AlphaStrict(parse_alpha(text)?))
        }
    }
}

fn mode_name(mode: &MoveMode) -> Value {
    match mode {
        MoveMode::Strict => json!("strict"),
        MoveMode::WeakSsne => json!("weak_ssne"),
        MoveMode::AlphaStrict(a) => json!({ "alpha": q(a) }),
    }
}

fn lip_function(game: &FiniteGame, bg: Option<&BottleneckGame>, f: FunctionArg) -> Result<LipFunction> {
    match (f, bg) {
        (FunctionArg::Pi, Some(bg)) => Ok(phi_pi(bg)),
        (FunctionArg::Pi, None) => Ok(LipFunction::private_costs(game)),
        (FunctionArg::Psi, Some(bg)) => Ok(psi_facility(bg)),
        (FunctionArg::Upsilon, Some(bg)) => Ok(upsilon(bg)),
        (_, None) => Err(Error::Validation {
            what: "function".into(),
            detail: "psi and upsilon need a congestion model, not a cost table".into(),
        }),
    }
}

fn with_costs(game: &FiniteGame, x: &Profile) -> Result<Value> {
    Ok(json!({ "profile": profile(x), "costs": qs(&game.costs(x)?) }))
}

fn verdict_json(game: &FiniteGame, phi: &LipFunction, v: &LipVerdict) -> Result<Value> {
    let cx = match &v.counterexample {
        Some(m) => json!({
            "from": profile(&m.from),
            "coalition": m.coalition,
            "to": profile(&m.to),
            "costs_before": qs(&game.costs(&m.from)?),
            "costs_after": qs(&game.costs(&m.to)?),
            "values_before": qs(&phi.eval(&m.from.0)),
            "values_after": qs(&phi.eval(&m.to.0)),
        }),
        None => Value::Null,
    };
    Ok(json!({
        "function": phi.name().to_string(),
        "verdict": if v.holds { "holds" } else { "fails" },
        "moves_checked": v.moves_checked,
        "counterexample": cx,
    }))
}

pub fn check_lip(common: &Common, moves: &MoveArgs, function: FunctionArg) -> Result<Report> {
    let loaded = load(common)?;
    let (game, bg) = finite(common, &loaded)?;
    let phi = lip_function(&game, bg.as_ref(), function)?;
    let mode = move_mode(moves.mode, moves.alpha.as_deref())?;
    let k = moves.max_coalition.unwrap_or(game.players());
    let v = verify_lip_with_mode(&game, &phi, k, mode.clone())?;
    let mut cfg = config(common, &loaded);
    cfg.insert("mode".into(), mode_name(&mode));
    cfg.insert("max_coalition".into(), json!(k));
    Ok(Report {
        command: "check-lip".into(),
        config: cfg,
        results: verdict_json(&game, &phi, &v)?,
        provenance: match function {
            FunctionArg::Upsilon => vec!["the unsorted facility-cost vector is not a LIP certificate in general"],
            _ => vec![
                "bottleneck congestion games have the LIP for the private-cost vector and the used-facility matrix",
                "LIP: sorted-lex strict decrease along every improving move",
            ],
        },
    })
}

pub fn potential(common: &Common, max_coalition: Option<usize>, function: FunctionArg) -> Result<Report> {
    let loaded = load(common)?;
    let (game, bg) = finite(common, &loaded)?;
    let phi = lip_function(&game, bg.as_ref(), function)?;
    let k = max_coalition.unwrap_or(game.players());
    let spec = compute_exponent(&game, &phi, k)?;
    let s = spec.summary();
    let mut cfg = config(common, &loaded);
    cfg.insert("max_coalition".into(), json!(k));
    Ok(Report {
        command: "potential".into(),
        config: cfg,
        results: json!({
            "function": s.function,
            "q": s.q,
            "phi_max": s.phi_max,
            "eps_min": s.eps_min,
            "exponent": s.exponent,
            "no_moves": s.no_moves,
            "path_bound": path_bound(&spec).to_string(),
            "range_path_bound": range_path_bound(&game, &spec, k)?.to_string(),
        }),
        provenance: vec![
            "a LIP certificate yields the generalized strong ordinal potential sum of phi_i^M",
            "improvement paths are bounded by q * phi_max^M / eps_min for costs of at least one",
        ],
    })
}

fn parse_start(game: &FiniteGame, text: Option<&str>) -> Result<Profile> {
    let x = match text {
        None => Profile(vec![0; game.players()]),
        Some(t) => Profile(
            t.split(',')
                .map(|s| {
                    s.trim().parse::<usize>().map_err(|_| Error::Validation {
                        what: "start profile".into(),
                        detail: format!("{s:?} is not a strategy index"),
                    })
                })
                .collect::<Result<_>>()?,
        ),
    };
    game.check_profile(&x)?;
    Ok(x)
}

pub fn dynamics_run(
    common: &Common,
    moves: &MoveArgs,
    start: Option<&str>,
    rule: RuleArg,
    step_cap: Option<u64>,
) -> Result<Report> {
    let loaded = load(common)?;
    let (game, bg) = finite(common, &loaded)?;
    let x0 = parse_start(&game, start)?;
    let mode = move_mode(moves.mode, moves.alpha.as_deref())?;
    let k = moves.max_coalition.unwrap_or(game.players());
    let bound = match mode {
        MoveMode::Strict => compute_exponent(&game, &lip_function(&game, bg.as_ref(), FunctionArg::Pi)?, k)
            .ok()
            .map(|spec| path_bound(&spec)),
        _ => None,
    };
    let mut cfg = DynamicsConfig::strong(game.players())
        .with_mode(mode.clone())
        .with_max_coalition(k)
        .with_rule(match rule {
            RuleArg::First => SelectionRule::First,
            RuleArg::Best => SelectionRule::BestResponse,
            RuleArg::Random => SelectionRule::Random(common.seed),
        });
    let cap = step_cap.or_else(|| bound.as_ref().and_then(|b| u64::try_from(b.clone()).ok()));
    if let Some(cap) = cap {
        cfg = cfg.with_step_cap(cap);
    }
    let mut report = run(&game, &x0, &cfg)?;
    if let Some(b) = bound {
        report = report.with_bound(b);
    }
    let mut c = config(common, &loaded);
    c.insert("mode".into(), mode_name(&mode));
    c.insert("max_coalition".into(), json!(k));
    c.insert("rule".into(), serde_json::to_value(&cfg.rule).expect("plain enum"));
    c.insert("step_cap".into(), json!(cfg.step_cap));
    Ok(Report {
        command: "dynamics run".into(),
        config: c,
        results: json!({
            "start": profile(&x0),
            "steps": report.steps,
            "terminal": with_costs(&game, &report.terminal)?,
            "class": serde_json::to_value(report.class).expect("plain enum"),
            "path": report.path.iter().map(profile).collect::<Vec<_>>(),
            "coalitions": report.coalitions,
            "path_bound": report.bound.map(|b| b.to_string()),
        }),
        provenance: vec!["games with the LIP have the strong finite improvement property"],
    })
}

pub fn dynamics_graph(common: &Common, moves: &MoveArgs) -> Result<Report> {
    let loaded = load(common)?;
    let (game, _) = finite(common, &loaded)?;
    let mode = move_mode(moves.mode, moves.alpha.as_deref())?;
    let k = moves.max_coalition.unwrap_or(game.players());
    let graph = improvement_graph_with_mode(&game, k, mode.clone())?;
    let space = game.space()?;
    let cycle = graph.find_cycle();
    let longest = if cycle.is_none() { Some(longest_path_length(&graph)?) } else { None };
    let mut c = config(common, &loaded);
    c.insert("mode".into(), mode_name(&mode));
    c.insert("max_coalition".into(), json!(k));
    Ok(Report {
        command: "dynamics graph".into(),
        config: c,
        results: json!({
            "nodes": graph.node_count(),
            "edges": graph.edge_count(),
            "acyclic": cycle.is_none(),
            "longest_path": longest,
            "cycle": cycle.map(|c| c.into_iter().map(|v| profile(&space.profile(v))).collect::<Vec<_>>()),
        }),
        provenance: vec!["an acyclic improvement graph is equivalent to the LIP for some vector function"],
    })
}

pub fn sne_enum(common: &Common, mode: ModeArg) -> Result<Report> {
    let loaded = load(common)?;
    let (game, _) = finite(common, &loaded)?;
    let (label, found) = match mode {
        ModeArg::Strict => ("sne", enumerate_sne(&game)?),
        ModeArg::WeakSsne => ("ssne", enumerate_ssne(&game)?),
        ModeArg::Alpha => {
            return Err(Error::Validation {
                what: "mode".into(),
                detail: "enumeration supports strict and weak-ssne".into(),
            })
        }
    };
    let mut c = config(common, &loaded);
    c.insert("mode".into(), json!(label));
    Ok(Report {
        command: "sne-enum".into(),
        config: c,
        results: json!({
            "count": found.len(),
            "equilibria": found.iter().map(|x| with_costs(&game, x)).collect::<Result<Vec<_>>>()?,
        }),
        provenance: vec!["brute force over all profiles and coalitions"],
    })
}

pub fn fairness(common: &Common) -> Result<Report> {
    let loaded = load(common)?;
    let (game, _) = finite(common, &loaded)?;
    let fair = enumerate_minmax_fair(&game)?;
    let lex = sorted_lex_minimizers(&game)?;
    let annotate = |xs: &[Profile]| -> Result<Vec<Value>> {
        xs.iter()
            .map(|x| {
                let mut v = with_costs(&game, x)?;
                v["strict_pareto"] = json!(is_strict_pareto(&game, x)?);
                v["sne"] = json!(is_sne(&game, x)?);
                Ok(v)
            })
            .collect()
    };
    Ok(Report {
        command: "fairness".into(),
        config: config(common, &loaded),
        results: json!({
            "minmax_fair": annotate(&fair)?,
            "sorted_lex_minimizers": annotate(&lex)?,
            "fair_within_minimizers": fair.iter().all(|x| lex.contains(x)),
        }),
        provenance: vec![
            "every min-max fair profile is a strict Pareto optimum",
            "min-max fair profiles minimize the private-cost vector in sorted-lex order",
        ],
    })
}

fn social(c: &SocialCost) -> Value {
    match c {
        SocialCost::Exact(r) => q(r),
        SocialCost::Real(v) => json!(v),
    }
}

fn price(p: &Price) -> Value {
    match p {
        Price::Exact(r) => json!({ "value": q(r), "unbounded": false }),
        Price::Real(v) => json!({ "value": v, "unbounded": false }),
        Price::Unbounded => json!({ "value": "inf", "unbounded": true }),
    }
}

pub fn efficiency(common: &Common, p: &str) -> Result<Report> {
    let loaded = load(common)?;
    let (game, _) = finite(common, &loaded)?;
    let norm = Norm::parse(p)?;
    let r = brute_efficiency(&game, norm)?;
    let mut c = config(common, &loaded);
    c.insert("p".into(), json!(p));
    Ok(Report {
        command: "efficiency".into(),
        config: c,
        results: json!({
            "optimum": { "profile": profile(&r.optimum_profile), "cost": social(&r.optimum) },
            "best_sne": { "profile": profile(&r.best_sne), "cost": social(&r.best_sne_cost) },
            "worst_sne": { "profile": profile(&r.worst_sne), "cost": social(&r.worst_sne_cost) },
            "price_of_stability": price(&r.price_of_stability),
            "price_of_anarchy": price(&r.price_of_anarchy),
            "sne_count": r.sne_count,
        }),
        provenance: vec![
            "with the LIP the strong price of stability is 1 for the maximum norm and below n for L_p",
        ],
    })
}

fn vertex_path(inst: &RoutingInstance, arcs: &[usize]) -> Vec<String> {
    let mut out = Vec::with_capacity(arcs.len() + 1);
    if let Some(&a) = arcs.first() {
        out.push(inst.vertices[inst.arcs[a].tail].clone());
    }
    out.extend(arcs.iter().map(|&a| inst.vertices[inst.arcs[a].head].clone()));
    out
}

pub fn routing(common: &Common, convex: bool) -> Result<Report> {
    let loaded = load(common)?;
    let LoadedGame::Routing(inst) = &loaded.game else {
        return Err(Error::Validation {
            what: "kind".into(),
            detail: format!("routing commands need a routing file, got {}", loaded.kind),
        });
    };
    let sol = if convex {
        sne_convex_costs(inst)?
    } else {
        sne_identical_costs(inst)?
    };
    // brute-force confirmation only when the strategy space fits the budget
    let verified = match finite(common, &loaded) {
        Ok((game, _)) => match is_sne(&game, &sol.profile) {
            Ok(v) => Some(v),
            Err(Error::Budget(_)) => None,
            Err(e) => return Err(e),
        },
        Err(Error::Budget(_)) => None,
        Err(e) => return Err(e),
    };
    let certificate = match &sol.cut {
        Some(_) => Some(verify_cut_certificate(inst, &sol.profile)?),
        None => None,
    };
    Ok(Report {
        command: if convex { "routing sne-convex" } else { "routing sne-identical" }.into(),
        config: config(common, &loaded),
        results: json!({
            "profile": profile(&sol.profile),
            "paths": sol.paths.iter().map(|p| json!({ "arcs": p, "vertices": vertex_path(inst, p) })).collect::<Vec<_>>(),
            "costs": qs(&sol.costs),
            "flow": sol.flow.arc_flow,
            "cut": sol.cut,
            "cut_certificate": certificate,
            "exponent": sol.exponent,
            "potential": sol.potential.as_ref().map(q),
            "verified_sne": verified,
        }),
        provenance: if convex {
            vec!["a minimum of the scaled flow potential is a strong equilibrium for convex arc costs"]
        } else {
            vec!["balancing players over the paths of a minimum cut gives a strong equilibrium for identical arc costs"]
        },
    })
}

pub fn splittable_approx(common: &Common, alpha: &str, coalition_samples: usize) -> Result<Report> {
    let loaded = load(common)?;
    let LoadedGame::Splittable(inst) = &loaded.game else {
        return Err(Error::Validation {
            what: "kind".into(),
            detail: format!("splittable commands need a splittable file, got {}", loaded.kind),
        });
    };
    let a = parse_alpha(alpha)?;
    let cfg = SolverConfig {
        verify: VerifyConfig {
            coalition_samples,
            seed: common.seed,
        },
        ..SolverConfig::default()
    };
    let r = approx_sne(inst, &a, &cfg)?;
    let mut c = config(common, &loaded);
    c.insert("alpha".into(), q(&a));
    c.insert("coalition_samples".into(), json!(coalition_samples));
    c.insert("eps_solver".into(), json!(r.eps_solver));
    Ok(Report {
        command: "splittable approx".into(),
        config: c,
        results: json!({
            "intensities": r.state.xi,
            "costs": private_costs(inst, &r.state),
            "exponent": r.exponent,
            "sweeps": r.sweeps,
            "final_gap": r.final_gap,
            "repairs": r.repairs,
            "warning": r.warning,
            "verified": r.verified(),
            "unilateral_check_exact": r.check.unilateral_exact,
            "coalitions_sampled": r.check.coalitions_sampled,
            "violation": serde_json::to_value(&r.check.violation).expect("plain data"),
        }),
        provenance: vec![
            "alpha-improving moves decrease the alpha potential by at least (alpha/2)^M",
            "convex splittable routing admits approximate strong equilibria via convex minimisation",
        ],
    })
}
