use crane_yetter::homology::{betti_numbers, boundary_squared_vanishes, signature};
use crane_yetter::simplicial::{parse_triangulation, Triangulation, TriangulationError};

fn load(name: &str) -> Triangulation {
    let path = format!("{}/data/{}", env!("CARGO_MANIFEST_DIR"), name);
    parse_triangulation(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn census_of_shipped_files() {
    assert_eq!(load("s4_boundary5.tri").face_census(), ([6, 15, 20, 15, 6], 2));
    assert_eq!(load("s4_flip15.tri").face_census().1, 2);
    let cp2 = load("cp2_9.tri");
    assert_eq!(cp2.simplices().len(), 36);
    assert_eq!(cp2.face_census(), ([9, 36, 84, 90, 36], 3));
    assert_eq!(load("s1xs3.tri").face_census().1, 0);
}

#[test]
fn homology_of_shipped_files() {
    for (name, betti) in [
        ("s4_boundary5.tri", [1, 0, 0, 0, 1]),
        ("s4_flip15.tri", [1, 0, 0, 0, 1]),
        ("cp2_9.tri", [1, 0, 1, 0, 1]),
        ("s1xs3.tri", [1, 1, 0, 1, 1]),
    ] {
        let t = load(name);
        assert!(boundary_squared_vanishes(&t), "{}", name);
        assert_eq!(betti_numbers(&t), betti, "{}", name);
    }
}

#[test]
fn signatures_of_shipped_files() {
    let cp2 = load("cp2_9.tri").validate_and_orient().unwrap();
    assert_eq!(signature(&cp2).unwrap(), 1);
    assert_eq!(signature(&cp2.reverse_orientation()).unwrap(), -1);
    assert_eq!(signature(&load("s1xs3.tri")).unwrap(), 0);
    assert_eq!(signature(&load("s4_flip15.tri")).unwrap(), 0);
}

#[test]
fn nonorientable_file_is_rejected() {
    let t = load("nonorientable.tri");
    assert!(t.is_closed());
    assert!(matches!(t.validate_and_orient(), Err(TriangulationError::NonOrientable)));
}
