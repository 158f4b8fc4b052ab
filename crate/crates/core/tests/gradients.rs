use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use recipe_rl::neural::{Head, Mlp};

/// Central differences of `upstream . f(params)` against reverse mode.
fn check(arch: &[usize], head: Head, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = Mlp::new(arch, head, &mut rng).unwrap();
    // nonzero biases keep pre-activations away from the ReLU kink
    let mut flat = net.to_flat();
    flat.iter_mut().for_each(|p| *p += rng.gen_range(-0.05..0.05));
    net.set_flat(&flat).unwrap();
    let x: Vec<f64> = (0..arch[0]).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let up: Vec<f64> = (0..*arch.last().unwrap()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let loss = |n: &Mlp| -> f64 { n.forward(&x).unwrap().iter().zip(&up).map(|(a, b)| a * b).sum() };

    let (grads, dx) = net.backward(&net.forward_cached(&x).unwrap(), &up).unwrap();
    let analytic = grads.to_flat();
    let h = 1e-5;
    let mut worst = 0.0f64;
    let mut probe = net.clone();
    for i in 0..flat.len() {
        let mut p = flat.clone();
        p[i] += h;
        probe.set_flat(&p).unwrap();
        let plus = loss(&probe);
        p[i] -= 2.0 * h;
        probe.set_flat(&p).unwrap();
        let minus = loss(&probe);
        let fd = (plus - minus) / (2.0 * h);
        let err = (fd - analytic[i]).abs() / fd.abs().max(analytic[i].abs()).max(1e-6);
        worst = worst.max(err);
    }
    for (i, g) in dx.iter().enumerate() {
        let mut xp = x.clone();
        xp[i] += h;
        let mut xm = x.clone();
        xm[i] -= h;
        let f = |v: &[f64]| -> f64 { net.forward(v).unwrap().iter().zip(&up).map(|(a, b)| a * b).sum() };
        let fd = (f(&xp) - f(&xm)) / (2.0 * h);
        worst = worst.max((fd - g).abs() / fd.abs().max(g.abs()).max(1e-6));
    }
    worst
}

#[test]
fn policy_and_critic_gradients_match_finite_differences() {
    for hidden in [vec![50, 50], vec![50, 25, 10]] {
        for (head, n_in, n_out) in [(Head::Tanh, 40, 1), (Head::Identity, 41, 1), (Head::Tanh, 14, 3)] {
            let arch: Vec<usize> = std::iter::once(n_in).chain(hidden.iter().copied()).chain([n_out]).collect();
            let err = check(&arch, head, 17);
            assert!(err <= 1e-4, "{arch:?} {head:?}: {err}");
        }
    }
}
