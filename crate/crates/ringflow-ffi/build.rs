use std::env;
use std::fs;
use std::path::PathBuf;

fn main() {
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");

    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    let config =
        cbindgen::Config::from_file(crate_dir.join("cbindgen.toml")).expect("cbindgen.toml parses");
    let header = cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
        .expect("header generation");

    let generated = PathBuf::from(env::var("OUT_DIR").unwrap()).join("ringflow.h");
    header.write_to_file(&generated);

    // Sync the checked-in header, but only on real changes so no-op builds
    // leave its mtime alone.
    let tracked = crate_dir.join("include").join("ringflow.h");
    let fresh = fs::read(&generated).expect("generated header readable");
    if fs::read(&tracked).ok().as_deref() != Some(fresh.as_slice()) {
        fs::create_dir_all(tracked.parent().unwrap()).expect("include dir");
        fs::write(&tracked, &fresh).expect("header sync");
    }
}
