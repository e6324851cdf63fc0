use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use zklogin_core::csys::{
    extract_witness, prove, sim_prove, verify, Assignment, BackendKind, ConstraintSystem, CsError, Lc, Mode, Proof,
    ProofBackendKey,
};
use zklogin_core::fieldcore::Fe;

/// Public y, witness x with x^3 + x + 5 = y, split over two regions.
fn cubic(mode: Mode, x: u64) -> ConstraintSystem {
    let xf = Fe::from_u64(x);
    let mut cs = ConstraintSystem::new(mode);
    let y = cs.alloc_public(xf * xf * xf + xf + Fe::from_u64(5));
    let xv = cs.alloc_witness(xf);
    let sq = cs.region("poly", |cs| {
        let sq = cs.alloc_witness(xf * xf);
        cs.region("square", |cs| cs.enforce(xv.into(), xv.into(), sq.into())).unwrap();
        sq
    });
    cs.region("poly", |cs| {
        let cube = cs.alloc_witness(xf * xf * xf);
        cs.enforce(sq.into(), xv.into(), cube.into()).unwrap();
        cs.region("sum", |cs| cs.enforce_equal(Lc::from(cube) + xv + Fe::from_u64(5), y.into())).unwrap();
    });
    cs
}

#[test]
fn satisfaction_and_violation_region() {
    let cs = cubic(Mode::Full, 3);
    cs.check_self().unwrap();
    assert_eq!(cs.num_public(), 1);
    assert_eq!(cs.num_witness(), 3);
    assert_eq!(cs.num_constraints(), 3);

    let mut z = cs.assignment();
    z.witness[1] += Fe::ONE;
    assert_eq!(cs.satisfied(&z), Err(CsError::Violation { index: 0, region: "poly/square".into() }));
    let mut z = cs.assignment();
    z.public[0] += Fe::ONE;
    assert_eq!(cs.satisfied(&z), Err(CsError::Violation { index: 2, region: "poly/sum".into() }));
    let mut z = cs.assignment();
    z.witness.pop();
    assert!(matches!(cs.satisfied(&z), Err(CsError::LengthMismatch { .. })));
}

#[test]
fn region_accounting() {
    let cs = cubic(Mode::Setup, 3);
    let stats = cs.stats();
    assert_eq!(stats["poly/square"], 1);
    assert_eq!(stats["poly"], 1);
    assert_eq!(stats["poly/sum"], 1);
    assert_eq!(cs.region_total("poly"), 3);
    assert_eq!(cs.region_total("pol"), 0);
    assert_eq!(cs.top_level_stats()["poly"], 3);
    assert_eq!(cs.region_of(0), Some("poly/square"));
    assert_eq!(cs.region_of(3), None);
}

#[test]
fn modes_agree_on_shape() {
    let (setup, prove_pass, full) = (cubic(Mode::Setup, 3), cubic(Mode::Prove, 3), cubic(Mode::Full, 3));
    assert_eq!(setup.digest(), full.digest());
    assert_eq!(setup.digest(), cubic(Mode::Setup, 4).digest());
    assert_eq!(prove_pass.num_constraints(), setup.num_constraints());
    assert!(prove_pass.constraints().is_empty());
    assert_eq!(prove_pass.check_self(), Err(CsError::NoConstraints));
    setup.satisfied(&prove_pass.assignment()).unwrap();
    assert!(setup.satisfied(&cubic(Mode::Prove, 4).assignment()).is_ok());

    let mut other = cubic(Mode::Setup, 3);
    other.enforce_zero(Lc::zero()).unwrap();
    assert_ne!(other.digest(), setup.digest());
}

#[test]
fn transparent_backend() {
    let system = cubic(Mode::Setup, 0);
    let z = cubic(Mode::Prove, 3).into_assignment();
    let key = ProofBackendKey::transparent();
    let pi = prove(&key, &system, &z).unwrap();
    assert_eq!(pi.kind(), BackendKind::Transparent);
    assert!(verify(&key, &system, &z.public, &pi));
    assert_eq!(extract_witness(&system, &pi).unwrap(), z.witness);
    assert!(!verify(&key, &system, &[z.public[0] + Fe::ONE], &pi));
    assert!(!verify(&key, &system, &[], &pi));

    let mut bad = z.clone();
    bad.witness[0] = Fe::from_u64(4);
    assert!(matches!(prove(&key, &system, &bad), Err(CsError::UnsatisfiedWitness { .. })));
    assert_eq!(sim_prove(&key, &system, &z.public).err(), Some(CsError::BackendMismatch));

    let mut bytes = pi.as_bytes().to_vec();
    bytes.truncate(bytes.len() - 1);
    assert!(Proof::from_bytes(bytes).map_or(true, |p| !verify(&key, &system, &z.public, &p)));
}

#[test]
fn simulation_backend() {
    let system = cubic(Mode::Setup, 0);
    let z = cubic(Mode::Prove, 3).into_assignment();
    let key = ProofBackendKey::generate(BackendKind::Simulation, &mut ChaCha20Rng::seed_from_u64(1));
    let other = ProofBackendKey::generate(BackendKind::Simulation, &mut ChaCha20Rng::seed_from_u64(2));
    let pi = prove(&key, &system, &z).unwrap();
    assert_eq!(pi.len(), 33);
    assert!(verify(&key, &system, &z.public, &pi));
    assert!(!verify(&other, &system, &z.public, &pi));
    assert!(!verify(&ProofBackendKey::transparent(), &system, &z.public, &pi));
    assert!(!verify(&key, &system, &[z.public[0] + Fe::ONE], &pi));
    assert!(extract_witness(&system, &pi).is_err());

    // the trapdoor proves anything, the real prover only true statements
    let fake = sim_prove(&key, &system, &[Fe::from_u64(1)]).unwrap();
    assert!(verify(&key, &system, &[Fe::from_u64(1)], &fake));
    assert_eq!(sim_prove(&key, &system, &z.public).unwrap().as_bytes(), pi.as_bytes());
    let mut bad = z.clone();
    bad.public[0] = Fe::from_u64(1);
    assert!(prove(&key, &system, &bad).is_err());

    let mut bigger = cubic(Mode::Setup, 0);
    bigger.enforce_zero(Lc::zero()).unwrap();
    assert!(!verify(&key, &bigger, &z.public, &pi));
    assert!(key.trapdoor().is_some());
    assert!(ProofBackendKey::transparent().trapdoor().is_none());
}

#[test]
fn backend_kind_strings() {
    for k in [BackendKind::Transparent, BackendKind::Simulation] {
        assert_eq!(k.to_string().parse::<BackendKind>().unwrap(), k);
    }
    assert!("groth16".parse::<BackendKind>().is_err());
}

#[test]
fn assignment_split() {
    let v: Vec<Fe> = (0..5).map(Fe::from_u64).collect();
    let a = Assignment::from_values(&v, 2);
    assert_eq!(a.public.len(), 2);
    assert_eq!(a.values(), v);
}

proptest! {
    #[test]
    fn lc_eval_is_linear(
        terms in proptest::collection::vec((0usize..4, 0usize..6, any::<u64>()), 0..24),
        k in any::<u64>(),
        c in any::<u64>(),
        vals in proptest::collection::vec(any::<u64>(), 10),
    ) {
        let mut cs = ConstraintSystem::new(Mode::Full);
        let pubs: Vec<_> = vals[..4].iter().map(|&v| cs.alloc_public(Fe::from_u64(v))).collect();
        let wits: Vec<_> = vals[4..].iter().map(|&v| cs.alloc_witness(Fe::from_u64(v))).collect();
        let mut lc = Lc::constant_u64(c);
        let mut expected = Fe::from_u64(c);
        for &(p, w, coeff) in &terms {
            let (var, val) = if coeff % 2 == 0 { (pubs[p], vals[p]) } else { (wits[w], vals[4 + w]) };
            lc.push(var, Fe::from_u64(coeff));
            expected += Fe::from_u64(coeff) * Fe::from_u64(val);
        }
        prop_assert_eq!(cs.eval(&lc), expected);
        prop_assert_eq!(cs.eval(&lc.clone().normalized()), expected);
        prop_assert_eq!(cs.eval(&lc.clone().scale(Fe::from_u64(k))), expected * Fe::from_u64(k));
        prop_assert_eq!(cs.eval(&(lc.clone() - &lc)), Fe::ZERO);
        let n = lc.normalized();
        let mut seen = std::collections::HashSet::new();
        prop_assert!(n.terms.iter().all(|(v, c)| !c.is_zero() && seen.insert(*v)));
    }

    #[test]
    fn cubic_accepts_only_roots(x in 0u64..1000, y in 0u64..1000) {
        let system = cubic(Mode::Setup, 0);
        let z = cubic(Mode::Prove, x).into_assignment();
        let mut claimed = z.clone();
        claimed.public[0] = Fe::from_u64(y);
        let key = ProofBackendKey::transparent();
        let pi = prove(&key, &system, &z).unwrap();
        prop_assert_eq!(verify(&key, &system, &claimed.public, &pi), claimed.public == z.public);
    }
}
