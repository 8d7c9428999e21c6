use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    let header = crate_dir.join("include").join("exitprob.h");
    std::fs::create_dir_all(header.parent().unwrap()).unwrap();

    match cbindgen::generate(&crate_dir) {
        Ok(bindings) => {
            bindings.write_to_file(&header);
        }
        Err(err) => {
            // keep the previously generated header usable during syntax-broken
            // intermediate builds
            println!("cargo:warning=cbindgen failed: {}", err);
        }
    }
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
}
