//! Random embedded circuits and fixture loading shared by the test targets.
#![allow(dead_code)]

use fluxcharge::analysis::EmbeddedCircuit;
use fluxcharge::graph::{Circuit, Dart, EdgeSpec, Element, RotationSystem};
use fluxcharge::io::parse_netlist;
use fluxcharge::linalg::frac;
use fluxcharge::reduction::{ReductionOptions, VariableChoice};
use rand::seq::SliceRandom;
use rand::Rng;

pub const FIXTURES: [&str; 6] = ["lc", "fig3", "fig5a", "fig5b", "k5", "fig1a"];

pub fn fixture_path(name: &str) -> String {
    format!("{}/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).expect("fixture exists")
}

pub fn load(name: &str) -> (EmbeddedCircuit, Option<VariableChoice>) {
    parse_netlist(&fixture_text(name)).expect("fixture parses").build().expect("fixture builds")
}

pub fn options(choice: Option<VariableChoice>) -> ReductionOptions {
    ReductionOptions { variable_choice: choice, ..Default::default() }
}

/// A combinatorial map under construction. Dart `2e` leaves the tail of
/// edge `e`, dart `2e + 1` leaves its head; `rotation[v]` lists the darts
/// leaving `v` in cyclic order.
#[derive(Debug, Clone, Default)]
pub struct MapBuilder {
    pub edges: Vec<(usize, usize)>,
    pub rotation: Vec<Vec<usize>>,
}

impl MapBuilder {
    pub fn triangle() -> Self {
        let mut m = Self { edges: vec![(0, 1), (1, 2), (2, 0)], rotation: vec![Vec::new(); 3] };
        m.rotation[0] = vec![0, 5];
        m.rotation[1] = vec![2, 1];
        m.rotation[2] = vec![4, 3];
        m
    }

    /// `rows × cols` grid with both directions wrapping around, so every
    /// face is a square on the torus.
    pub fn torus_grid(rows: usize, cols: usize) -> Self {
        let id = |i: usize, j: usize| (i % rows) * cols + (j % cols);
        let mut m = Self { edges: Vec::new(), rotation: vec![Vec::new(); rows * cols] };
        for i in 0..rows {
            for j in 0..cols {
                m.edges.push((id(i, j), id(i, j + 1)));
                m.edges.push((id(i, j), id(i + 1, j)));
            }
        }
        let horizontal = |i: usize, j: usize| 2 * (i * cols + j);
        let vertical = |i: usize, j: usize| 2 * (i * cols + j) + 1;
        for i in 0..rows {
            for j in 0..cols {
                let east = 2 * horizontal(i, j);
                let north = 2 * vertical(i, j);
                let west = 2 * horizontal(i, (j + cols - 1) % cols) + 1;
                let south = 2 * vertical((i + rows - 1) % rows, j) + 1;
                m.rotation[id(i, j)] = vec![east, north, west, south];
            }
        }
        m
    }

    pub fn vertex_count(&self) -> usize {
        self.rotation.len()
    }

    pub fn origin(&self, d: usize) -> usize {
        let (t, h) = self.edges[d / 2];
        if d.is_multiple_of(2) {
            t
        } else {
            h
        }
    }

    fn successor(&self, d: usize) -> usize {
        let r = &self.rotation[self.origin(d)];
        let k = r.iter().position(|&x| x == d).expect("dart in rotation");
        r[(k + 1) % r.len()]
    }

    fn face_next(&self, d: usize) -> usize {
        self.successor(d ^ 1)
    }

    /// Face walks as dart sequences.
    pub fn faces(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; 2 * self.edges.len()];
        let mut out = Vec::new();
        for start in 0..seen.len() {
            if seen[start] {
                continue;
            }
            let mut walk = Vec::new();
            let mut d = start;
            while !seen[d] {
                seen[d] = true;
                walk.push(d);
                d = self.face_next(d);
            }
            out.push(walk);
        }
        out
    }

    fn insert_before(&mut self, v: usize, before: usize, dart: usize) {
        let r = &mut self.rotation[v];
        let k = r.iter().position(|&x| x == before).expect("dart in rotation");
        r.insert(k, dart);
    }

    /// Splits a face with a new edge from the origin of `walk[i]` to the
    /// origin of `walk[j]`.
    pub fn add_chord(&mut self, walk: &[usize], i: usize, j: usize) -> usize {
        let (u, w) = (self.origin(walk[i]), self.origin(walk[j]));
        assert!(u != w, "chord would be a self-loop");
        let e = self.edges.len();
        self.edges.push((u, w));
        self.insert_before(u, walk[i], 2 * e);
        self.insert_before(w, walk[j], 2 * e + 1);
        e
    }

    /// Hangs a new vertex inside the face, attached at the origin of
    /// `walk[i]`; returns the new vertex.
    pub fn add_pendant(&mut self, walk: &[usize], i: usize) -> usize {
        let u = self.origin(walk[i]);
        let v = self.rotation.len();
        let e = self.edges.len();
        self.edges.push((u, v));
        self.rotation.push(vec![2 * e + 1]);
        self.insert_before(u, walk[i], 2 * e);
        v
    }

    fn face_of(&self, dart: usize) -> Vec<usize> {
        self.faces().into_iter().find(|f| f.contains(&dart)).expect("every dart is on a face")
    }

    /// A random chord inside a random face, if some face has two distinct
    /// non-adjacent corners.
    pub fn random_chord(&mut self, rng: &mut impl Rng) -> bool {
        let mut faces = self.faces();
        faces.shuffle(rng);
        for f in faces {
            let n = f.len();
            let mut pairs: Vec<(usize, usize)> = (0..n)
                .flat_map(|i| (i + 2..n).map(move |j| (i, j)))
                .filter(|&(i, j)| !(i == 0 && j == n - 1))
                .filter(|&(i, j)| self.origin(f[i]) != self.origin(f[j]))
                .collect();
            pairs.shuffle(rng);
            if let Some(&(i, j)) = pairs.first() {
                self.add_chord(&f, i, j);
                return true;
            }
        }
        false
    }

    /// A new vertex in a random face, joined to the face boundary by two or
    /// more edges (or by one edge when `bridge` is set).
    pub fn random_vertex(&mut self, rng: &mut impl Rng, bridge: bool, stack: bool) {
        let faces = self.faces();
        let f = faces.choose(rng).expect("a face").clone();
        let i = rng.gen_range(0..f.len());
        let v = self.add_pendant(&f, i);
        if bridge {
            return;
        }
        let dart = 2 * (self.edges.len() - 1) + 1;
        loop {
            let walk = self.face_of(dart);
            let start = walk.iter().position(|&d| d == dart).expect("on its face");
            let walk: Vec<usize> = walk[start..].iter().chain(&walk[..start]).copied().collect();
            // walk[0] leaves v; corners 2..len-1 are the candidates.
            let targets: Vec<usize> =
                (2..walk.len().saturating_sub(1)).filter(|&j| self.origin(walk[j]) != v).collect();
            let Some(&j) = targets.choose(rng) else { break };
            let j = if stack { *targets.last().expect("nonempty") } else { j };
            self.add_chord(&walk, 0, j);
            if !stack && rng.gen_bool(0.5) {
                break;
            }
            if stack && self.face_of(dart).len() <= 3 {
                break;
            }
        }
    }

    /// Element kinds and parameters drawn at random; names `v1…`, `e1…`.
    pub fn build(&self, rng: &mut impl Rng) -> EmbeddedCircuit {
        let kinds: Vec<bool> = self.edges.iter().map(|_| rng.gen_bool(0.5)).collect();
        let params: Vec<(i64, i64)> = self.edges.iter().map(|_| (rng.gen_range(1..=6), rng.gen_range(1..=4))).collect();
        self.build_with(&kinds, &params)
    }

    /// `capacitive[e]` picks capacitor or inductor; `params[e]` is `p/q`.
    pub fn build_with(&self, capacitive: &[bool], params: &[(i64, i64)]) -> EmbeddedCircuit {
        let vertices: Vec<String> = (1..=self.vertex_count()).map(|i| format!("v{i}")).collect();
        let specs = self
            .edges
            .iter()
            .enumerate()
            .map(|(e, &(t, h))| {
                let value = frac(params[e].0, params[e].1);
                EdgeSpec {
                    id: format!("e{}", e + 1),
                    from: vertices[t].clone(),
                    to: vertices[h].clone(),
                    element: if capacitive[e] { Element::capacitor(value) } else { Element::inductor(value) },
                }
            })
            .collect();
        let circuit = Circuit::new(vertices, specs).expect("generated circuit is valid");
        let cycles = self.rotation.iter().map(|r| r.iter().map(|&d| Dart(d).edge_end()).collect()).collect();
        let rotation = RotationSystem::new(&circuit, cycles).expect("generated rotation is valid");
        EmbeddedCircuit::new(circuit, rotation)
    }
}

/// A connected planar map on up to `max_vertices` vertices grown from a
/// triangle by new vertices and chords. Without `bridges` every edge lies on
/// two distinct faces.
pub fn planar_map(rng: &mut impl Rng, max_vertices: usize, bridges: bool) -> MapBuilder {
    let mut m = MapBuilder::triangle();
    let target = rng.gen_range(3..=max_vertices.max(3));
    let stack = rng.gen_bool(0.3);
    while m.vertex_count() < target {
        let bridge = bridges && rng.gen_bool(0.15);
        m.random_vertex(rng, bridge, stack);
        if rng.gen_bool(0.3) {
            m.random_chord(rng);
        }
    }
    m
}

pub fn planar_circuit(rng: &mut impl Rng, max_vertices: usize, bridges: bool) -> EmbeddedCircuit {
    planar_map(rng, max_vertices, bridges).build(rng)
}

/// A torus grid of at least 3 × 3 with a few diagonal chords.
pub fn torus_circuit(rng: &mut impl Rng) -> EmbeddedCircuit {
    let mut m = MapBuilder::torus_grid(rng.gen_range(3..=5), rng.gen_range(3..=5));
    for _ in 0..rng.gen_range(0..4) {
        m.random_chord(rng);
    }
    m.build(rng)
}
