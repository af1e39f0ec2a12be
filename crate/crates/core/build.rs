use std::env;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

// Embeds every `queries/<language>/<operator>.scm` file into the library.
fn main() {
    let manifest_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    let query_root = manifest_dir.join("queries");
    println!("cargo:rerun-if-changed={}", query_root.display());

    let mut entries = Vec::new();
    collect(&query_root, &mut entries);
    entries.sort();

    let mut out = String::from("pub(crate) static EMBEDDED_QUERIES: &[(&str, &str, &str)] = &[\n");
    for (lang, op, path) in &entries {
        println!("cargo:rerun-if-changed={}", path.display());
        writeln!(out, "    ({lang:?}, {op:?}, include_str!({:?})),", path.display().to_string()).unwrap();
    }
    out.push_str("];\n");

    let dest = PathBuf::from(env::var("OUT_DIR").unwrap()).join("embedded_queries.rs");
    fs::write(dest, out).unwrap();
}

fn collect(root: &Path, entries: &mut Vec<(String, String, PathBuf)>) {
    let Ok(langs) = fs::read_dir(root) else { return };
    for lang in langs.flatten() {
        if !lang.path().is_dir() {
            continue;
        }
        let lang_name = lang.file_name().to_string_lossy().into_owned();
        println!("cargo:rerun-if-changed={}", lang.path().display());
        for file in fs::read_dir(lang.path()).unwrap().flatten() {
            let path = file.path();
            if path.extension().and_then(|e| e.to_str()) == Some("scm") {
                let op = path.file_stem().unwrap().to_string_lossy().into_owned();
                entries.push((lang_name.clone(), op, path));
            }
        }
    }
}
