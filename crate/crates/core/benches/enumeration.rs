//! Sequential against rayon-backed kernels on the same games.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lipgame::congestion::{phi_pi, BottleneckGame};
use lipgame::dynamics::improvement_graph;
use lipgame::game::enumerate_sne;
use lipgame::generate::{self, CongestionShape};
use lipgame::potential::verify_lip;
use lipgame::Exec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// first seeded draw with the requested players and at least 3^n profiles
fn sample_game(players: usize) -> BottleneckGame {
    let shape = CongestionShape {
        max_players: players,
        max_facilities: 6,
        max_strategies: 5,
        max_cost: 9,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(players as u64);
    let floor = 3usize.pow(players as u32);
    std::iter::repeat_with(|| generate::bottleneck_game(shape, &mut rng))
        .find(|g| {
            g.model().players() == players && g.model().strategy_counts().iter().product::<usize>() >= floor
        })
        .expect("the generator eventually draws a large game")
}

const EXECS: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn tabulate(c: &mut Criterion) {
    let mut group = c.benchmark_group("tabulate");
    for players in [4, 6] {
        let b = sample_game(players);
        for (name, exec) in EXECS {
            group.bench_with_input(BenchmarkId::new(name, players), &b, |bch, b| {
                bch.iter(|| black_box(b.game().build_table(exec).unwrap()))
            });
        }
    }
    group.finish();
}

fn moves(c: &mut Criterion) {
    let mut group = c.benchmark_group("moves");
    group.sample_size(10);
    for players in [4, 5] {
        let b = sample_game(players);
        b.game().table().unwrap();
        for (name, exec) in EXECS {
            let b = b.clone().map_game(|g| g.with_exec(exec));
            let phi = phi_pi(&b);
            let k = b.model().players();
            group.bench_with_input(BenchmarkId::new(format!("graph/{name}"), players), &b, |bch, b| {
                bch.iter(|| black_box(improvement_graph(b.game(), k).unwrap().edge_count()))
            });
            group.bench_with_input(BenchmarkId::new(format!("verify_lip/{name}"), players), &b, |bch, b| {
                bch.iter(|| black_box(verify_lip(b.game(), &phi, k).unwrap().moves_checked))
            });
            group.bench_with_input(BenchmarkId::new(format!("sne/{name}"), players), &b, |bch, b| {
                bch.iter(|| black_box(enumerate_sne(b.game()).unwrap().len()))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, tabulate, moves);
criterion_main!(benches);
