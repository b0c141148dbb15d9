use criterion::{criterion_group, criterion_main, Criterion};
use mobman_core::disturbances::Preset;
use mobman_core::{run, ControlMode, SimConfig};

fn closed_loop(c: &mut Criterion) {
    let mut group = c.benchmark_group("closed_loop_1s");
    group.sample_size(20);
    for mode in ControlMode::ALL {
        let mut cfg = SimConfig::default();
        cfg.control.mode = mode;
        cfg.disturbance.preset = Preset::Vibration;
        cfg.sim.duration = 1.0;
        group.bench_function(mode.name(), |b| b.iter(|| run(&cfg).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, closed_loop);
criterion_main!(benches);
