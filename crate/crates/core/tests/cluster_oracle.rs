use narratables::clusterkit::{analyze, canonicalize, conservation_vector, same_row_space, MomentumKernel};
use narratables::geometry::{rat, Rational};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Leibniz determinant of a small integer matrix.
fn det(m: &[Vec<i64>]) -> i64 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut total = 0;
    let mut perm: Vec<usize> = (0..n).collect();
    // Heap's algorithm with parity tracking.
    let mut c = vec![0usize; n];
    let mut sign = 1i64;
    let term = |p: &[usize]| (0..n).map(|i| m[i][p[i]]).product::<i64>();
    total += sign * term(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            sign = -sign;
            total += sign * term(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    total
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

/// Rank as the size of the largest nonvanishing minor.
fn minor_rank(rows: &[Vec<i64>]) -> usize {
    let Some(width) = rows.first().map(Vec::len) else {
        return 0;
    };
    for k in (1..=rows.len().min(width)).rev() {
        for rs in subsets(rows.len(), k) {
            for cs in subsets(width, k) {
                let sub: Vec<Vec<i64>> = rs.iter().map(|&r| cs.iter().map(|&c| rows[r][c]).collect()).collect();
                if det(&sub) != 0 {
                    return k;
                }
            }
        }
    }
    0
}

/// (conserves, compliant) from minors alone.
fn oracle(rows: &[Vec<i64>], cons: &[i64]) -> (bool, bool, usize) {
    let rank = minor_rank(rows);
    let mut with_c = rows.to_vec();
    with_c.push(cons.to_vec());
    let conserves = rank > 0 && minor_rank(&with_c) == rank;
    (conserves, conserves && rank == 1, rank)
}

fn to_rat(rows: &[Vec<i64>]) -> Vec<Vec<Rational>> {
    rows.iter().map(|r| r.iter().map(|&x| rat(x, 1)).collect()).collect()
}

fn random_kernel(rng: &mut impl Rng) -> (usize, usize, Vec<Vec<i64>>) {
    let width = rng.gen_range(2..=5);
    let outs = rng.gen_range(0..=width);
    let cons: Vec<i64> = (0..width).map(|i| if i < outs { 1 } else { -1 }).collect();
    let n_rows = rng.gen_range(0..=4);
    let mut rows = Vec::new();
    while rows.len() < n_rows {
        let row: Vec<i64> = match rng.gen_range(0..6) {
            // Scaled conservation row.
            0 => {
                let s = [-2, -1, 1, 2][rng.gen_range(0..4)];
                cons.iter().map(|c| c * s).collect()
            }
            // Conservation plus a multiple of an earlier row, clamped to range.
            1 if !rows.is_empty() => {
                let base: &Vec<i64> = &rows[rng.gen_range(0..rows.len())];
                let s = rng.gen_range(-1..=1);
                cons.iter().zip(base).map(|(c, b)| (c + s * b).clamp(-2, 2)).collect()
            }
            _ => (0..width).map(|_| rng.gen_range(-2..=2)).collect(),
        };
        if row.iter().any(|&x| x != 0) {
            rows.push(row);
        }
    }
    (width, outs, rows)
}

fn build(width: usize, outs: usize, rows: &[Vec<i64>]) -> MomentumKernel {
    let out: Vec<String> = (0..outs).map(|i| format!("q{}", i + 1)).collect();
    let inn: Vec<String> = (0..width - outs).map(|i| format!("p{}", i + 1)).collect();
    MomentumKernel::new(inn, out, to_rat(rows)).unwrap()
}

#[test]
fn elimination_agrees_with_minor_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (mut compliant, mut violating, mut nonconserving) = (0, 0, 0);
    for _ in 0..10_000 {
        let (width, outs, rows) = random_kernel(&mut rng);
        let kernel = build(width, outs, &rows);
        let cons: Vec<i64> = (0..width).map(|i| if i < outs { 1 } else { -1 }).collect();
        let (conserves, ok, rank) = oracle(&rows, &cons);
        let v = analyze(&kernel);
        assert_eq!((v.conserves_momentum, v.compliant, v.rank), (conserves, ok, rank), "{rows:?}");
        match (ok, conserves) {
            (true, _) => compliant += 1,
            (false, true) => violating += 1,
            (false, false) => nonconserving += 1,
        }
    }
    assert!(compliant > 500 && violating > 300 && nonconserving > 3000, "{compliant} {violating} {nonconserving}");
}

#[test]
fn canonical_form_is_stable() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let mut checked = 0;
    for _ in 0..3_000 {
        let (width, outs, rows) = random_kernel(&mut rng);
        let kernel = build(width, outs, &rows);
        let Ok(canon) = canonicalize(&kernel) else {
            assert!(!analyze(&kernel).conserves_momentum);
            continue;
        };
        checked += 1;
        assert_eq!(canon.deltas()[0], conservation_vector(&kernel));
        assert!(same_row_space(kernel.deltas(), canon.deltas()));
        assert_eq!(canonicalize(&canon).unwrap(), canon);
        assert_eq!(analyze(&canon), analyze(&kernel));
    }
    assert!(checked > 300);
}

/// Row operation (target, source, numerator, denominator).
type RowOp = (usize, usize, i64, i64);

fn kernel_and_ops() -> impl Strategy<Value = (Vec<Vec<i64>>, usize, Vec<RowOp>)> {
    (2usize..=5)
        .prop_flat_map(|w| {
            (
                prop::collection::vec(prop::collection::vec(-2i64..=2, w), 1..=4),
                0..=w,
                prop::collection::vec((0usize..8, 0usize..8, -3i64..=3, 1i64..=3), 0..6),
            )
        })
        .prop_filter("nonzero rows", |(rows, _, _)| rows.iter().all(|r| r.iter().any(|&x| x != 0)))
}

proptest! {
    #[test]
    fn verdict_survives_row_operations((rows, outs, ops) in kernel_and_ops()) {
        let width = rows[0].len();
        let base = analyze(&build(width, outs, &rows));
        let mut m = to_rat(&rows);
        for (a, b, num, den) in ops {
            let (a, b) = (a % m.len(), b % m.len());
            match num.rem_euclid(3) {
                // Add a multiple of another row.
                0 if a != b => {
                    let src = m[b].clone();
                    for (x, y) in m[a].iter_mut().zip(src) {
                        *x = &*x + rat(num, den) * y;
                    }
                }
                // Scale by a nonzero rational.
                1 => {
                    let s = rat(if num == 0 { 1 } else { num }, den);
                    for x in m[a].iter_mut() {
                        *x = &*x * &s;
                    }
                }
                _ => m.swap(a, b),
            }
        }
        m.retain(|r| r.iter().any(|x| *x != rat(0, 1)));
        let out: Vec<String> = (0..outs).map(|i| format!("q{i}")).collect();
        let inn: Vec<String> = (0..width - outs).map(|i| format!("p{i}")).collect();
        let after = analyze(&MomentumKernel::new(inn, out, m).unwrap());
        prop_assert_eq!(
            (base.conserves_momentum, base.compliant, base.rank),
            (after.conserves_momentum, after.compliant, after.rank)
        );
        prop_assert_eq!(base.witness, after.witness);
    }

    #[test]
    fn slot_permutation_keeps_verdict(
        (rows, outs, _) in kernel_and_ops(),
        seed in any::<u64>(),
    ) {
        let width = rows[0].len();
        let base = analyze(&build(width, outs, &rows));
        // Permute within the outgoing block and within the incoming block so
        // the conservation vector is unchanged.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut perm: Vec<usize> = (0..width).collect();
        for i in (1..outs).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        for i in (outs + 1..width).rev() {
            perm.swap(i, rng.gen_range(outs..=i));
        }
        let permuted: Vec<Vec<i64>> =
            rows.iter().map(|r| (0..width).map(|j| r[perm[j]]).collect()).collect();
        let after = analyze(&build(width, outs, &permuted));
        prop_assert_eq!(
            (base.conserves_momentum, base.compliant, base.rank),
            (after.conserves_momentum, after.compliant, after.rank)
        );
        prop_assert_eq!(base.witness.is_some(), after.witness.is_some());
        if let Some(w) = after.witness {
            // Mapped back, the witness is a genuine extra constraint of the
            // original kernel.
            let mut back = vec![rat(0, 1); width];
            for (j, c) in w.coefficients.iter().enumerate() {
                back[perm[j]] = c.clone();
            }
            let support: Vec<usize> = {
                let mut s: Vec<usize> = w.support.iter().map(|&j| perm[j]).collect();
                s.sort_unstable();
                s
            };
            let nonzero: Vec<usize> = (0..width).filter(|&j| back[j] != rat(0, 1)).collect();
            prop_assert_eq!(support, nonzero);
            let mut with = to_rat(&rows);
            with.push(back);
            prop_assert!(same_row_space(&to_rat(&rows), &with));
        }
    }
}

#[test]
fn two_delta_support_is_equivariant_under_swaps() {
    // Swapping q1↔q2 together with p1↔p2 maps the kernel to itself.
    let rows = vec![vec![0, 1, -1, 0], vec![1, 0, 0, -1]];
    let swapped: Vec<Vec<i64>> = rows.iter().map(|r| vec![r[1], r[0], r[3], r[2]]).collect();
    let a = analyze(&build(4, 2, &rows));
    let b = analyze(&build(4, 2, &swapped));
    assert_eq!(a, b);
    assert_eq!(a.witness.unwrap().support, vec![0, 3]);
}
