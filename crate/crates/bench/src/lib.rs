//! Criterion benchmarks for the numerical kernels, kept in a library so the
//! bench target only wires them up.

use std::hint::black_box;

use criterion::Criterion;
use smirnov::extremal::solve_tilde_qnp;
use smirnov::geom::{builtin, DomainSpec};
use smirnov::oracle::{leja_equilibrium, ReferenceMap};
use smirnov::ortho::SzegoState;
use smirnov::quad::build_grid_at;
use smirnov::{QuadratureGrid, Resolution, C64};

fn grid(d: &DomainSpec) -> QuadratureGrid {
    build_grid_at(d, Resolution::reference(d)).expect("builtin domain")
}

pub fn quadrature(c: &mut Criterion) {
    let square = builtin::unit_square();
    c.bench_function("grid/square-reference", |b| {
        b.iter(|| build_grid_at(black_box(&square), Resolution::reference(&square)).unwrap())
    });
}

pub fn szego(c: &mut Criterion) {
    let square = builtin::unit_square();
    let g = grid(&square);
    let mut group = c.benchmark_group("szego/square");
    for n in [32, 96] {
        group.bench_function(format!("n{n}"), |b| {
            b.iter(|| SzegoState::build(&g, square.zeta(), black_box(n)).unwrap())
        });
    }
    group.finish();
}

pub fn irls(c: &mut Criterion) {
    let ellipse = builtin::ellipse();
    let g = grid(&ellipse);
    let map = ReferenceMap::for_domain(&ellipse).unwrap().unwrap();
    let mut group = c.benchmark_group("irls/ellipse");
    for p in [1.0, 3.0] {
        let target = map.phi_prime_power(g.points(), p).unwrap();
        group.bench_function(format!("p{p}-n16"), |b| {
            b.iter(|| solve_tilde_qnp(&g, ellipse.zeta(), 16, black_box(p), &target).unwrap())
        });
    }
    group.finish();
}

pub fn roots(c: &mut Criterion) {
    let square = builtin::unit_square();
    let g = grid(&square);
    let q = SzegoState::build(&g, square.zeta(), 64).unwrap().szego_q(64).unwrap();
    c.bench_function("roots/szego-q64", |b| b.iter(|| black_box(&q).roots(1e-13).unwrap()));
}

pub fn oracles(c: &mut Criterion) {
    let square = builtin::unit_square();
    let g = grid(&square);
    c.bench_function("leja/square-m128", |b| {
        b.iter(|| leja_equilibrium(black_box(&g), 128, 4).unwrap())
    });
    let cubic = builtin::cubic();
    let map = ReferenceMap::for_domain(&cubic).unwrap().unwrap();
    let pts: Vec<C64> = grid(&cubic).points().iter().step_by(8).copied().collect();
    c.bench_function("newton/cubic-128", |b| {
        b.iter(|| {
            pts.iter()
                .map(|z| map.phi(*z).unwrap())
                .fold(C64::new(0.0, 0.0), |a, w| a + w)
        })
    });
}

pub fn benchmarks(c: &mut Criterion) {
    quadrature(c);
    szego(c);
    irls(c);
    roots(c);
    oracles(c);
}
