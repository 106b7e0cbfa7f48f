mod common;

use common::{bit_equal, mesh_bit_equal, random_mesh, random_results};
use meshfield::error::Error;
use meshfield::io::{read_data, read_file, read_mesh, write_file, CfsReader, CfsWriter};
use meshfield::model::{single_region_mesh, AnalysisType, ElementType, ResType, ResultArray, ResultContainer};
use ndarray::Array3;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn unit_cube() -> meshfield::model::Mesh {
    let coords = (0..8)
        .map(|k| [(k & 1) as f64, ((k >> 1) & 1) as f64, ((k >> 2) & 1) as f64])
        .collect();
    single_region_mesh(coords, vec![ElementType::Hexa8], vec![vec![1, 2, 4, 3, 5, 6, 8, 7]], "cube").unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn write_read_is_identity(seed in any::<u64>(), nodes in 2usize..400, harmonic in any::<bool>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let mesh = random_mesh(&mut rng, nodes);
        let analysis = if harmonic { AnalysisType::Harmonic } else { AnalysisType::Transient };
        let results = random_results(&mut rng, &mesh, analysis);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.cfs");
        write_file(&p, &mesh, Some(&results)).unwrap();
        let (m2, r2) = read_file(&p).unwrap();
        prop_assert!(mesh_bit_equal(&mesh, &m2));
        prop_assert!(bit_equal(&results, &r2));
        prop_assert_eq!(r2.is_empty(), false);
    }
}

#[test]
fn cube_fixture_info() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("cube.cfs");
    write_file(&p, &unit_cube(), None).unwrap();
    let m = read_mesh(&p).unwrap();
    assert_eq!(m.info().num_nodes, 8);
    assert_eq!(m.info().num_elements, 1);
    assert_eq!(m.info().dimension, 3);
    let (m2, r) = read_file(&p).unwrap();
    assert_eq!(m, m2);
    assert!(r.is_empty());
    assert!(!CfsReader::open(&p).unwrap().has_results());
}

#[test]
fn read_file_is_read_mesh_plus_read_data() {
    let mut rng = StdRng::seed_from_u64(3);
    let mesh = random_mesh(&mut rng, 50);
    let res = random_results(&mut rng, &mesh, AnalysisType::Transient);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("f.cfs");
    write_file(&p, &mesh, Some(&res)).unwrap();
    let (m, r) = read_file(&p).unwrap();
    assert_eq!(m, read_mesh(&p).unwrap());
    assert_eq!(r, read_data(&p, 1).unwrap());
    assert_eq!(r.analysis_type(), AnalysisType::Transient);
}

#[test]
fn writer_is_deterministic() {
    let mut rng = StdRng::seed_from_u64(11);
    let mesh = random_mesh(&mut rng, 120);
    let res = random_results(&mut rng, &mesh, AnalysisType::Harmonic);
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.cfs"), dir.path().join("b.cfs"));
    write_file(&a, &mesh, Some(&res)).unwrap();
    write_file(&b, &mesh, Some(&res)).unwrap();
    let (ra, rb) = (CfsReader::open(&a).unwrap(), CfsReader::open(&b).unwrap());
    let (ma, mb) = (ra.mesh().unwrap(), rb.mesh().unwrap());
    assert!(mesh_bit_equal(&ma, &mb));
    assert!(bit_equal(&ra.multi_step_data(1).unwrap(), &rb.multi_step_data(1).unwrap()));
    assert_eq!(ra.datasets_read(), rb.datasets_read());
}

#[test]
fn reader_only_touches_requested_multi_step() {
    let mut rng = StdRng::seed_from_u64(5);
    let mesh = random_mesh(&mut rng, 40);
    let first = random_results(&mut rng, &mesh, AnalysisType::Transient);
    let second: ResultContainer = {
        let harmonic = random_results(&mut rng, &mesh, AnalysisType::Harmonic);
        let arrays = harmonic
            .into_arrays()
            .into_iter()
            .map(|a| a.to_builder().multi_step(2).build(a.data().clone()).unwrap())
            .collect();
        ResultContainer::from_arrays(arrays).unwrap()
    };
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("two.cfs");
    let w = CfsWriter::create(&p).unwrap();
    w.create_file(&mesh, Some(&first)).unwrap();
    w.add_multi_step(&mesh, &second).unwrap();
    assert!(w.add_multi_step(&mesh, &second).is_err());
    drop(w);

    for (id, expected) in [(1, &first), (2, &second)] {
        let r = CfsReader::open(&p).unwrap();
        assert_eq!(r.multi_step_ids().unwrap(), vec![1, 2]);
        let got = r.multi_step_data(id).unwrap();
        assert!(bit_equal(expected, &got));
        let trace = r.datasets_read();
        assert!(!trace.is_empty());
        let other = format!("MultiStep_{}", 3 - id);
        assert!(trace.iter().all(|d| !d.contains(&other)), "multi-step {id} read {trace:?}");
        assert!(trace.iter().any(|d| d.contains(&format!("MultiStep_{id}"))));
    }
}

#[test]
fn missing_multi_step_lists_available() {
    let mut rng = StdRng::seed_from_u64(8);
    let mesh = random_mesh(&mut rng, 10);
    let res = random_results(&mut rng, &mesh, AnalysisType::Transient);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("f.cfs");
    write_file(&p, &mesh, Some(&res)).unwrap();
    let e = read_data(&p, 2).unwrap_err();
    assert!(matches!(e, Error::MissingMultiStep { .. }), "{e:?}");
    assert!(e.to_string().contains("available: [1]"), "{e}");
}

#[test]
fn nonexistent_path() {
    let e = read_file("/nonexistent/dir/file.cfs").unwrap_err();
    assert!(matches!(e, Error::FileNotFound(_)));
    assert!(e.is_input_error());
}

#[test]
fn unknown_region_and_size_mismatch_rejected() {
    let mesh = unit_cube();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("f.cfs");
    let bad_region = ResultArray::builder("acouPressure", "foo", ResType::Node)
        .build(Array3::<f64>::zeros((1, 8, 1)))
        .unwrap();
    let c = ResultContainer::from_arrays(vec![bad_region]).unwrap();
    assert!(write_file(&p, &mesh, Some(&c)).is_err());
    let bad_size = ResultArray::builder("acouPressure", "cube", ResType::Node)
        .build(Array3::<f64>::zeros((1, 7, 1)))
        .unwrap();
    let c = ResultContainer::from_arrays(vec![bad_size]).unwrap();
    assert!(matches!(write_file(&p, &mesh, Some(&c)), Err(Error::ShapeMismatch(_))));
}

#[test]
fn empty_container_writes_no_results_group() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("f.cfs");
    write_file(&p, &unit_cube(), Some(&ResultContainer::default())).unwrap();
    let f = hdf5::File::open(&p).unwrap();
    assert!(f.link_exists("Mesh"));
    assert!(!f.link_exists("Results"));
}

#[test]
fn corrupted_coordinates_named_in_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("f.cfs");
    write_file(&p, &unit_cube(), None).unwrap();
    {
        let f = hdf5::File::open_rw(&p).unwrap();
        f.unlink("Mesh/Nodes/Coordinates").unwrap();
        f.group("Mesh/Nodes").unwrap().new_dataset::<f64>().shape([8, 2]).create("Coordinates").unwrap();
    }
    let e = read_mesh(&p).unwrap_err();
    assert!(e.to_string().contains("/Mesh/Nodes/Coordinates"), "{e}");
}

#[test]
fn unknown_element_code_reported() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("f.cfs");
    write_file(&p, &unit_cube(), None).unwrap();
    {
        let f = hdf5::File::open_rw(&p).unwrap();
        f.dataset("Mesh/Elements/Types").unwrap().write(&[99i32]).unwrap();
    }
    let e = read_mesh(&p).unwrap_err();
    assert!(matches!(e, Error::UnknownElementCode(99)), "{e:?}");
    assert!(e.to_string().contains("99"));
}
