use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

use sri_core::corpus::Frame;
use sri_core::eval::{evaluate, syntactic_baseline};
use sri_core::inference::{gibbs_step_role_mono, train, ClampMask, TrainConfig};
use sri_core::model::{frame_events, frame_log_joint_idx, CountTables, Hyperparams, RoleLabel, RoleSpace, TableMode, Vocabularies};
use sri_core::synth::{generate_corpus, SyntheticConfig, SyntheticCorpus};

fn corpus(frames: usize) -> SyntheticCorpus {
    let cfg = SyntheticConfig::from_toml(&format!(
        "seed = 1\nN = 6\nK = 2\npredicates = 10\n[[languages]]\nname = \"l1\"\nframes = {frames}\nfeature_sizes = [4, 30, 5]\npeakiness = 0.85\n"
    ))
    .unwrap();
    generate_corpus(&cfg).unwrap()
}

fn bench(c: &mut Criterion) {
    let s = corpus(500);
    let frames: Vec<&Frame> = s.corpus.frames(0).collect();
    let gold = s.gold(0);
    let vocab = Vocabularies::build(frames.iter().copied());
    let hp = Hyperparams::default();
    let space = RoleSpace::new(6, 2).unwrap();
    let mut tables = CountTables::new(space, vocab.feature_sizes(), vocab.predicates.len());
    let enc: Vec<_> = frames.iter().map(|f| vocab.encode(f)).collect();
    let roles: Vec<Vec<u8>> = frames
        .iter()
        .map(|f| {
            f.arguments
                .iter()
                .map(|a| space.index(a.gold_role.as_deref().unwrap().parse::<RoleLabel>().unwrap()).unwrap())
                .collect()
        })
        .collect();
    let mut ev = Vec::new();
    for (f, r) in enc.iter().zip(&roles) {
        ev.clear();
        frame_events(&tables, f, r, &mut ev).unwrap();
        tables.add_all(f.predicate.unwrap(), &ev);
    }
    let big = enc.iter().zip(&roles).max_by_key(|(f, _)| f.features.len()).unwrap();

    c.bench_function("frame_log_joint", |b| {
        b.iter(|| frame_log_joint_idx(black_box(big.0), black_box(big.1), &tables, &hp, TableMode::Included).unwrap())
    });

    c.bench_function("gibbs_step", |b| {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut r = big.1.clone();
        let p = big.0.predicate.unwrap();
        b.iter(|| {
            ev.clear();
            frame_events(&tables, big.0, &r, &mut ev).unwrap();
            tables.remove_all(p, &ev).unwrap();
            gibbs_step_role_mono(big.0, &mut r, 0, &mut tables, &hp, &mut rng).unwrap()
        })
    });

    let mut group = c.benchmark_group("train");
    group.sample_size(10);
    group.bench_function("sweeps_500_frames", |b| {
        let mut cfg = TrainConfig::new(6, 2);
        cfg.iterations = 2;
        cfg.burn_in = 1;
        b.iter_batched(
            || ClampMask::none(&s.corpus),
            |clamps| train(&s.corpus, &cfg, &clamps).unwrap(),
            BatchSize::SmallInput,
        )
    });
    group.finish();

    c.bench_function("syntactic_baseline_eval", |b| {
        b.iter(|| {
            let labels = syntactic_baseline("l1", &frames, 6);
            evaluate(&frames, &labels, &gold).unwrap().f1
        })
    });
}

criterion_group!(benches, bench);
criterion_main!(benches);
