//! Writes the sample profile documents under `data/` (or the directory given
//! as the first argument) and checks that each one reads back bit-exactly.

use std::path::PathBuf;

use horizonforge::io::ProfileDocument;
use horizonforge::profiles;
use horizonforge::schwarzschild::SchwarzschildOrbit;
use horizonforge::suite::phase_pair;
use horizonforge::Result;

fn main() -> Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data"));
    std::fs::create_dir_all(&dir).expect("create output directory");

    let round_area = profiles::round(2, 1.0, 2048)?.volume();
    let mut docs = vec![
        ("round_s2", ProfileDocument::from_metric(&profiles::round(2, 1.0, 2048)?)),
        ("bumpy_s2", ProfileDocument::from_metric(&profiles::with_volume(&profiles::bumpy(2, &[0.1], 2048)?, round_area))),
        ("dumbbell_s2", ProfileDocument::from_metric(&profiles::dumbbell(2, 0.3, 2048)?)),
        ("round_s3", ProfileDocument::from_metric(&profiles::round(3, 1.0, 129)?)),
        ("perturbed_s3", ProfileDocument::from_metric(&profiles::perturbed(3, 0.2, 129)?)),
        ("schwarzschild_tube", ProfileDocument::from_metric(&SchwarzschildOrbit::from_mass(0.5, 2).tube(1.2, 2.0, 512)?)),
    ];
    let (inner, outer) = phase_pair(2, 1.0, 0.6, 0.5, 0.7)?;
    docs.push(("inner_band", ProfileDocument::from_planar(&inner)));
    docs.push(("outer_band", ProfileDocument::from_planar(&outer)));

    for (name, mut doc) in docs {
        doc.metadata.insert("name".into(), name.into());
        let path = dir.join(format!("{name}.json"));
        std::fs::write(&path, doc.to_json()?).expect("write document");
        let back = ProfileDocument::read(&path)?;
        assert_eq!(back, doc, "{name} did not round-trip");
        println!("{} ({}, n = {}, {} samples)", path.display(), doc.kind, doc.n, doc.grid.points);
    }
    Ok(())
}
