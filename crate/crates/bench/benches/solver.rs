use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use embias::debias::{
    apply_transform, build_problem, solve_sdp, BackgroundPolicy, BuildOptions, SolveOptions, StepPolicy,
};
use embias::synthetic::{planted_bias, PlantedBiasConfig};

fn solver(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_sdp");
    group.sample_size(10);
    for dim in [30, 100] {
        let planted = planted_bias(&PlantedBiasConfig {
            dim,
            ..Default::default()
        });
        let anchors = [planted.anchors.clone()];
        let (train, test) = planted.seeds.split_at(80);
        let build = BuildOptions {
            background: BackgroundPolicy::AllExcept(test.to_vec()),
            ..Default::default()
        };
        let problem = build_problem(&planted.embedding, train, &anchors, &build).unwrap();
        for (name, step) in [("bb", StepPolicy::BarzilaiBorwein), ("fixed", StepPolicy::Lipschitz)] {
            let opts = SolveOptions {
                step,
                max_iters: 2000,
                tol: 1e-6,
            };
            group.bench_with_input(BenchmarkId::new(name, dim), &problem, |b, p| {
                b.iter(|| solve_sdp(p, &opts).unwrap())
            });
        }
        let solution = solve_sdp(&problem, &SolveOptions::default()).unwrap();
        group.bench_function(format!("apply_transform/{dim}"), |b| {
            b.iter(|| apply_transform(&planted.embedding, &solution.t).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, solver);
criterion_main!(benches);
