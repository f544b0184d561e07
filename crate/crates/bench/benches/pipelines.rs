//! End-to-end pipeline benchmarks: one representative workload per
//! machinery (Gröbner, certificate search, SDP, moment relaxation), all on
//! inputs small enough to keep a full run under a minute.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use mubcert_core::consys::{build_1111_2, promote_squared_objective};
use mubcert_core::groebner::{groebner_basis, BuchbergerOptions};
use mubcert_core::lasserre::build_moment_relaxation;
use mubcert_core::nulla::{build_linear_system, nulla_search};
use mubcert_core::qmp::{
    build_relaxation, convex_iteration, encode_constellation_qmp, ConvexIterOptions, FantopeInit,
    ObjectiveChoice,
};
use mubcert_core::sdp::{solve, SdpOptions};
use mubcert_core::MonomialOrder;

fn bench_groebner(c: &mut Criterion) {
    let sys = build_1111_2();
    c.bench_function("groebner/quartet/grevlex", |b| {
        b.iter(|| {
            let opts = BuchbergerOptions::default();
            groebner_basis(&sys.constraints, &opts).expect("terminates")
        })
    });
    c.bench_function("groebner/quartet/lex", |b| {
        b.iter(|| {
            let opts = BuchbergerOptions { order: MonomialOrder::Lex, ..Default::default() };
            groebner_basis(&sys.constraints, &opts).expect("terminates")
        })
    });
}

fn bench_nulla(c: &mut Criterion) {
    let sys = build_1111_2();
    c.bench_function("nulla/quartet/build-system-d6", |b| {
        b.iter(|| build_linear_system(&sys.constraints, 6).expect("builds"))
    });
    c.bench_function("nulla/quartet/search-to-d6", |b| {
        b.iter(|| nulla_search(&sys.constraints, 6).expect("completes"))
    });
}

fn bench_sdp(c: &mut Criterion) {
    // The lowest-order moment relaxation of the promoted quartet problem,
    // solved from scratch each iteration (15x15 block, 97 constraints).
    let sys = promote_squared_objective(&build_1111_2(), 0).expect("promotes");
    let objective = sys.objective.clone().expect("objective");
    let relax = build_moment_relaxation(&objective, &sys.constraints, 2).expect("builds");
    let problem = relax.into_sdp();
    c.bench_function("sdp/moment-k2/solve", |b| {
        b.iter_batched(
            || problem.clone(),
            |p| solve(&p, &SdpOptions::default()).expect("solves"),
            BatchSize::SmallInput,
        )
    });
}

fn bench_lasserre(c: &mut Criterion) {
    let sys = promote_squared_objective(&build_1111_2(), 0).expect("promotes");
    let objective = sys.objective.clone().expect("objective");
    c.bench_function("lasserre/quartet/build-k2", |b| {
        b.iter(|| build_moment_relaxation(&objective, &sys.constraints, 2).expect("builds"))
    });
}

fn bench_citer(c: &mut Criterion) {
    let spec = "2,1@2".parse().expect("spec");
    let qmp =
        encode_constellation_qmp(&spec, ObjectiveChoice::FirstOrthogonality).expect("encodes");
    let relax = build_relaxation(&qmp).expect("relaxes");
    let opts = ConvexIterOptions {
        init: FantopeInit::RandomProjector { seed: 1 },
        ..ConvexIterOptions::default()
    };
    c.bench_function("citer/pair-2d/seeded", |b| {
        b.iter(|| convex_iteration(&relax, &opts).expect("iterates"))
    });
}

criterion_group!(
    name = pipelines;
    config = Criterion::default().sample_size(10);
    targets = bench_groebner, bench_nulla, bench_sdp, bench_lasserre, bench_citer
);
criterion_main!(pipelines);
