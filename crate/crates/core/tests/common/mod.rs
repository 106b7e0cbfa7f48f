//! Random meshes and results shared by integration and acceptance tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use meshfield::model::{
    AnalysisType, ElementType, Mesh, Point3, Region, ResType, ResultArray, ResultContainer,
};
use ndarray::{Array2, Array3};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn element_types() -> Vec<ElementType> {
    ElementType::ALL.into_iter().filter(|&t| t != ElementType::Undef).collect()
}

/// Mesh with `num_nodes` random nodes and elements of every type whose node
/// count fits, plus up to three regions.
pub fn random_mesh(rng: &mut StdRng, num_nodes: usize) -> Mesh {
    let coords: Vec<Point3> = (0..num_nodes)
        .map(|_| [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)])
        .collect();
    let ids: Vec<u32> = (1..=num_nodes as u32).collect();
    let mut types = Vec::new();
    let mut elements = Vec::new();
    let usable: Vec<ElementType> = element_types().into_iter().filter(|t| t.node_count() <= num_nodes).collect();
    let num_elements = rng.gen_range(1..=(20 + num_nodes / 10));
    for k in 0..num_elements {
        // every usable type at least once, then random
        let t = if k < usable.len() { usable[k] } else { *usable.choose(rng).unwrap() };
        types.push(t);
        elements.push(ids.choose_multiple(rng, t.node_count()).copied().collect());
    }
    let mut mesh = Mesh::new(coords, types, elements, Vec::new()).unwrap();
    let num_regions = rng.gen_range(1..=3);
    for r in 0..num_regions {
        let count = rng.gen_range(1..=mesh.num_elements());
        let mut chosen: Vec<u32> = (1..=mesh.num_elements() as u32).collect::<Vec<_>>();
        chosen.shuffle(rng);
        chosen.truncate(count);
        let region = Region::from_elements(&mesh, format!("region_{r}"), chosen).unwrap();
        mesh.add_region(region).unwrap();
    }
    if rng.gen_bool(0.5) {
        let nodes: BTreeSet<u32> = (0..rng.gen_range(1..=num_nodes)).map(|_| rng.gen_range(1..=num_nodes as u32)).collect();
        mesh.add_region(Region::new("node_group", 0, nodes.into_iter().collect(), Vec::new(), true).unwrap())
            .unwrap();
    }
    mesh
}

/// Results on the regions of `mesh`: node and element fields plus one
/// history array, all sharing random strictly increasing step values.
pub fn random_results(rng: &mut StdRng, mesh: &Mesh, analysis: AnalysisType) -> ResultContainer {
    let n = rng.gen_range(1..=4);
    let mut t = rng.gen_range(-1.0..1.0);
    let steps: Vec<f64> = (0..n)
        .map(|_| {
            t += rng.gen_range(1e-3..1.0);
            t
        })
        .collect();
    let complex = analysis == AnalysisType::Harmonic;
    let mut arrays = Vec::new();
    for (qi, quantity) in ["mechDisplacement", "acouPressure"].iter().enumerate() {
        let d = if qi == 0 { 3 } else { 1 };
        for region in mesh.regions() {
            for res_type in [ResType::Node, ResType::Element] {
                let m = if res_type == ResType::Node { region.num_nodes() } else { region.num_elements() };
                // one result location per quantity keeps DOF names consistent
                if m == 0 || (res_type == ResType::Element) != (qi == 1) {
                    continue;
                }
                let b = ResultArray::builder(*quantity, region.name(), res_type)
                    .analysis(analysis)
                    .steps(steps.clone());
                let a = if complex {
                    b.build(Array3::from_shape_fn((n, m, d), |_| {
                        Complex64::new(rng.gen_range(-1e3..1e3), rng.gen_range(-1e3..1e3))
                    }))
                } else {
                    b.build(Array3::from_shape_fn((n, m, d), |_| rng.gen_range(-1e3..1e3)))
                };
                arrays.push(a.unwrap());
            }
        }
    }
    let region = mesh.regions()[0].name();
    let b = ResultArray::builder("energy", region, ResType::Region).analysis(analysis).steps(steps);
    let h = if complex {
        b.build(Array2::from_shape_fn((n, 2), |_| Complex64::new(rng.gen(), rng.gen())))
    } else {
        b.build(Array2::from_shape_fn((n, 2), |_| rng.gen::<f64>()))
    };
    arrays.push(h.unwrap());
    ResultContainer::from_arrays(arrays).unwrap()
}

/// Structural equality with bit-exact floats.
pub fn bit_equal(a: &ResultContainer, b: &ResultContainer) -> bool {
    if a != b || a.arrays().len() != b.arrays().len() {
        return false;
    }
    a.arrays().iter().zip(b.arrays()).all(|(x, y)| {
        let bits = |r: &ResultArray| -> Vec<u64> {
            let re = r.data().real_part();
            let im = r.data().imag_part();
            re.iter().chain(im.iter()).chain(r.step_values()).map(|v| v.to_bits()).collect()
        };
        bits(x) == bits(y)
    })
}

pub fn mesh_bit_equal(a: &Mesh, b: &Mesh) -> bool {
    a == b
        && a.coordinates()
            .iter()
            .flatten()
            .zip(b.coordinates().iter().flatten())
            .all(|(x, y)| x.to_bits() == y.to_bits())
}
