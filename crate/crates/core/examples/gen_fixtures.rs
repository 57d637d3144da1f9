//! Writes the named test graphs to `tests/fixtures/`.

use std::fs;
use std::path::Path;

use gdirac_core::graph::corpus;

fn main() -> std::io::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    fs::create_dir_all(&dir)?;
    for (name, doc) in corpus::named() {
        let path = dir.join(format!("{name}.json"));
        fs::write(&path, doc.to_json() + "\n")?;
        println!("{}", path.display());
    }
    Ok(())
}
