//! Writes the bundled stand-in tables to `data/`.

use std::path::Path;

fn main() -> std::io::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    std::fs::create_dir_all(&dir)?;
    for table in ppfs::synth::standin::bundled() {
        let path = dir.join(format!("{}.csv", table.name));
        std::fs::write(&path, table.to_csv())?;
        println!("{} ({} rows)", path.display(), table.rows.len());
    }
    Ok(())
}
