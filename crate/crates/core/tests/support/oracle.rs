// Copyright 2026 The jjtune Authors
// SPDX-License-Identifier: Apache-2.0

//! Brute-force collision enumeration over an adjacency matrix, written
//! without reference to the engine's edge iteration.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use jjtune::collision::{CollisionHit, CollisionParams, CollisionReport, CollisionType, QpuLayout, RING8_PATTERN};

pub type Canonical = Vec<(CollisionType, Vec<usize>)>;

pub fn canonical(hits: &[CollisionHit]) -> Canonical {
    let mut v: Canonical = hits.iter().map(|h| (h.collision_type, h.participants.clone())).collect();
    v.sort();
    v
}

pub fn brute_force(f: &[f64], layout: &QpuLayout, params: &CollisionParams) -> Canonical {
    use CollisionType::*;
    let n = f.len();
    let mut adj = vec![vec![false; n]; n];
    for &(i, j) in &layout.edges {
        adj[i][j] = true;
        adj[j][i] = true;
    }
    let a = params.anharmonicity_hz;
    let on = |t: CollisionType| params.enabled.contains(&t);
    let d = |t: CollisionType| params.thresholds_hz.get(&t).copied().unwrap_or(0.0);
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j || !adj[i][j] {
                continue;
            }
            if i < j && on(A1) && (f[i] - f[j]).abs() < d(A1) {
                out.push((A1, vec![i, j]));
            }
            if on(A2) && (f[i] - f[j] - a / 2.0).abs() < d(A2) {
                out.push((A2, vec![i, j]));
            }
            if i < j && on(C1) {
                let gap = (f[i] - f[j]).abs();
                let straddling = d(C1) < gap && gap < a.abs() - d(C1);
                if !straddling {
                    out.push((C1, vec![i, j]));
                }
            }
            if on(D1) && (f[i] + a / 2.0 - f[j]).abs() < d(D1) {
                out.push((D1, vec![i, j]));
            }
            // gate with control i, target j; drive at f[j]
            let (c, t, fd) = (i, j, f[j]);
            if on(E1) && (f[c] - fd).abs() < d(E1) {
                out.push((E1, vec![c, t]));
            }
            if on(E2) && (f[c] - fd - a / 2.0).abs() < d(E2) {
                out.push((E2, vec![c, t]));
            }
            for k in 0..n {
                if k == t || k == c || !adj[c][k] {
                    continue;
                }
                if on(S1) && (fd - f[k]).abs() < d(S1) {
                    out.push((S1, vec![c, t, k]));
                }
                if on(S2) && (fd - f[k] - a).abs() < d(S2) {
                    out.push((S2, vec![c, t, k]));
                }
                if on(T1) && (2.0 * fd - f[c] - f[k]).abs() < d(T1) {
                    out.push((T1, vec![c, t, k]));
                }
            }
        }
    }
    out.sort();
    out
}

/// Ring of 8 with a few random chords, frequencies scattered around the
/// default targets, random thresholds and enabled set.
pub fn random_instance<R: Rng>(rng: &mut R) -> (Vec<f64>, QpuLayout, CollisionParams) {
    let mut layout = QpuLayout::default();
    let mut edges: BTreeSet<(usize, usize)> = layout.edges.iter().map(|&(i, j)| (i.min(j), i.max(j))).collect();
    for _ in 0..rng.random_range(0..4) {
        let i = rng.random_range(0..8);
        let j = rng.random_range(0..8);
        if i != j {
            edges.insert((i.min(j), i.max(j)));
        }
    }
    layout.edges = edges.into_iter().collect();
    layout.group_of = RING8_PATTERN.to_vec();

    let freqs = (0..8)
        .map(|q| layout.target_frequency_hz[&layout.group_of[q]] + rng.random_range(-150e6..150e6))
        .collect();
    let thresholds: BTreeMap<CollisionType, f64> = CollisionType::ALL
        .iter()
        .map(|t| (*t, rng.random_range(0.0..60e6)))
        .collect();
    let enabled = CollisionType::ALL
        .iter()
        .copied()
        .filter(|_| rng.random_bool(0.8))
        .collect();
    let params = CollisionParams {
        anharmonicity_hz: rng.random_range(-260e6..-150e6),
        thresholds_hz: thresholds,
        enabled,
    };
    (freqs, layout, params)
}

/// Same hits (type, participants, detuning to 1 mHz) and counts.
pub fn same_report(a: &CollisionReport, b: &CollisionReport) -> bool {
    a.per_type_counts == b.per_type_counts
        && a.total_excluding_s1 == b.total_excluding_s1
        && a.hits.len() == b.hits.len()
        && a.hits.iter().zip(&b.hits).all(|(x, y)| {
            x.collision_type == y.collision_type
                && x.participants == y.participants
                && (x.detuning_hz - y.detuning_hz).abs() < 1e-3
        })
}
