mod common;

use common::fixture;
use meshfield::error::Error;
use meshfield::extras::{parse_stl, read_ensight_case, read_stl, write_stl};
use meshfield::model::{AnalysisType, ElementType, ResType};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[test]
fn cube_ascii_and_binary_agree() {
    let a = read_stl(fixture("cube_ascii.stl")).unwrap();
    let b = read_stl(fixture("cube_binary.stl")).unwrap();
    assert_eq!(a.num_nodes(), 8);
    assert_eq!(a.num_elements(), 12);
    assert!(a.element_types().iter().all(|&t| t == ElementType::Tria3));
    assert_eq!(a.regions()[0].name(), "cube");
    assert_eq!(a, b);
}

#[test]
fn stl_merge_is_idempotent() {
    let a = read_stl(fixture("cube_binary.stl")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    for binary in [true, false] {
        let p = dir.path().join(format!("c{binary}.stl"));
        write_stl(&p, &a, "cube", binary).unwrap();
        let b = read_stl(&p).unwrap();
        assert_eq!(b.num_nodes(), a.num_nodes());
        assert_eq!(b.coordinates(), a.coordinates());
    }
}

#[test]
fn stl_errors_are_structured() {
    assert!(matches!(read_stl(fixture("cube_truncated.stl")), Err(Error::Parse { format: "STL", .. })));
    match read_stl(fixture("bad_facet.stl")) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
        other => panic!("{other:?}"),
    }
    assert!(matches!(read_stl(fixture("no_such.stl")), Err(Error::FileNotFound(_))));
}

#[test]
fn ensight_minimal_case() {
    let (mesh, res) = read_ensight_case(fixture("ensight/plate.case")).unwrap();
    assert_eq!(mesh.num_nodes(), 4);
    assert_eq!(mesh.element_types(), &[ElementType::Quad4]);
    assert_eq!(mesh.regions()[0].name(), "plate");
    assert_eq!(res.analysis_type(), AnalysisType::Transient);

    let p = res.get("pressure", "plate").unwrap();
    assert_eq!(p.res_type(), ResType::Node);
    assert_eq!((p.num_steps(), p.num_dofs(), p.num_dims()), (2, 4, 1));
    assert_eq!(p.step_values(), &[0.0, 0.25]);
    let v = p.real_view3().unwrap();
    assert_eq!(v[[1, 3, 0]], 13.0);

    let u = res.get("velocity", "plate").unwrap();
    assert_eq!(u.res_type(), ResType::Element);
    assert_eq!((u.num_steps(), u.num_dofs(), u.num_dims()), (2, 1, 3));
    assert_eq!(u.real_view3().unwrap()[[1, 0, 2]], 3.0);
}

#[test]
fn ensight_errors() {
    let e = read_ensight_case(fixture("ensight/binary.case")).unwrap_err();
    assert!(matches!(e, Error::Unsupported(_)) && e.to_string().contains("ASCII only"), "{e}");
    let e = read_ensight_case(fixture("ensight/badelem.case")).unwrap_err();
    assert!(e.to_string().contains("nsided"), "{e}");
    let e = read_ensight_case(fixture("ensight/missing.case")).unwrap_err();
    assert!(e.to_string().contains("3 steps"), "{e}");
}

#[test]
fn ensight_without_variables() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(fixture("ensight/plate.geo"), dir.path().join("plate.geo")).unwrap();
    std::fs::write(dir.path().join("g.case"), "FORMAT\ntype: ensight gold\nGEOMETRY\nmodel: plate.geo\n").unwrap();
    let (mesh, res) = read_ensight_case(dir.path().join("g.case")).unwrap();
    assert_eq!(mesh.num_elements(), 1);
    assert!(res.is_empty());
}

fn mutate(rng: &mut StdRng, bytes: &[u8]) -> Vec<u8> {
    let mut out = bytes.to_vec();
    for _ in 0..rng.gen_range(1..8) {
        if out.is_empty() {
            out.push(rng.gen());
            continue;
        }
        let i = rng.gen_range(0..out.len());
        match rng.gen_range(0..5) {
            0 => out[i] = rng.gen(),
            1 => {
                out.remove(i);
            }
            2 => out.insert(i, rng.gen()),
            3 => out.truncate(i),
            _ => {
                let j = rng.gen_range(0..out.len());
                out.swap(i, j);
            }
        }
    }
    out
}

#[test]
fn fuzzed_stl_never_panics() {
    let mut rng = StdRng::seed_from_u64(42);
    let seeds = [
        std::fs::read(fixture("cube_ascii.stl")).unwrap(),
        std::fs::read(fixture("cube_binary.stl")).unwrap(),
    ];
    for k in 0..2000 {
        let data = mutate(&mut rng, &seeds[k % 2]);
        let _ = parse_stl(&data);
    }
}

#[test]
fn fuzzed_ensight_never_panics() {
    let mut rng = StdRng::seed_from_u64(7);
    let src = fixture("ensight");
    let dir = tempfile::tempdir().unwrap();
    for f in ["plate.case", "plate.geo", "plate.scl0000", "plate.scl0001", "plate.vel0000", "plate.vel0001"] {
        std::fs::copy(src.join(f), dir.path().join(f)).unwrap();
    }
    let names = ["plate.case", "plate.geo", "plate.scl0001", "plate.vel0000"];
    for k in 0..400 {
        let name = names[k % names.len()];
        let orig = std::fs::read(src.join(name)).unwrap();
        std::fs::write(dir.path().join(name), mutate(&mut rng, &orig)).unwrap();
        let _ = read_ensight_case(dir.path().join("plate.case"));
        std::fs::write(dir.path().join(name), orig).unwrap();
    }
}
