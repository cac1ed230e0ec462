use proptest::prelude::*;
use robin_stokes::io::{fmt_f64, read_csv, read_matrix_market, write_csv, write_matrix_market, write_vtk, Metadata, PointData};
use robin_stokes::linalg::CsrMatrix;
use robin_stokes::mesh::build_annulus;
use robin_stokes::{AnnulusSpec, BoundaryTag};

#[test]
fn csv_round_trip_keeps_metadata_and_values() {
    let meta = Metadata::new().with("config_sha256", "abc").with("seed", 7);
    let rows = vec![vec!["1".to_string(), fmt_f64(0.1)], vec!["2".to_string(), fmt_f64(1e-300)]];
    let mut buf = Vec::new();
    write_csv(&mut buf, &meta, &["l", "lambda"], &rows).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.starts_with("# config_sha256: abc\n# seed: 7\nl,lambda\n"));
    let t = read_csv(&buf[..]).unwrap();
    assert_eq!(t.meta, meta);
    assert_eq!(t.header, vec!["l", "lambda"]);
    assert_eq!(t.floats("lambda").unwrap(), vec![0.1, 1e-300]);
    assert!(t.floats("missing").is_none());
}

#[test]
fn vtk_lists_triangles_and_tagged_boundary_segments() {
    let mesh = build_annulus(&AnnulusSpec::new(0.5, 1.0, 0.2)).unwrap();
    let p: Vec<f64> = mesh.vertices.iter().map(|v| v[0]).collect();
    let u: Vec<[f64; 2]> = mesh.vertices.iter().map(|v| [-v[1], v[0]]).collect();
    let mut buf = Vec::new();
    write_vtk(&mut buf, &mesh, "test", &[PointData::Vector { name: "velocity", values: &u }, PointData::Scalar { name: "pressure", values: &p }]).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# vtk DataFile Version 2.0");
    assert_eq!(lines[2], "ASCII");
    let nt = mesh.triangles.len();
    let nb = mesh.boundary_edges.len();
    assert!(text.contains(&format!("POINTS {} double", mesh.vertices.len())));
    assert!(text.contains(&format!("CELLS {} {}", nt + nb, 4 * nt + 3 * nb)));
    let types_at = lines.iter().position(|l| l.starts_with("CELL_TYPES")).unwrap();
    assert_eq!(lines[types_at + 1..types_at + 1 + nt].iter().filter(|l| **l == "5").count(), nt);
    let tags_at = lines.iter().position(|l| l.starts_with("SCALARS boundary_tag")).unwrap() + 2;
    let tags = &lines[tags_at..tags_at + nt + nb];
    let outer = mesh.boundary_edges_with(BoundaryTag::GammaE).count();
    assert_eq!(tags.iter().filter(|t| **t == "1").count(), outer);
    assert_eq!(tags.iter().filter(|t| **t == "2").count(), nb - outer);
    assert!(text.contains("VECTORS velocity double") && text.contains("SCALARS pressure double 1"));
}

#[test]
fn matrix_market_rejects_other_formats() {
    let bad = "%%MatrixMarket matrix array real general\n1 1\n1.0\n";
    assert!(read_matrix_market(bad.as_bytes()).is_err());
}

proptest! {
    #[test]
    fn shortest_float_repr_round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn matrix_market_round_trips(entries in proptest::collection::vec((0usize..7, 0usize..5, -1e3f64..1e3), 0..30)) {
        let a = CsrMatrix::from_triplets(7, 5, entries);
        let mut buf = Vec::new();
        write_matrix_market(&mut buf, &a).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        prop_assert!(text.starts_with("%%MatrixMarket matrix coordinate real general\n7 5 "));
        let b = read_matrix_market(&buf[..]).unwrap();
        prop_assert_eq!(a.triplets().collect::<Vec<_>>(), b.triplets().collect::<Vec<_>>());
        prop_assert_eq!((b.nrows, b.ncols), (7, 5));
    }
}
