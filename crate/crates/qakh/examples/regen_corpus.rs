//! Rewrites the bundled corpus and its manifest from the engine.

fn main() -> anyhow::Result<()> {
    let entries = qakh::corpus::regenerate()?;
    qakh::corpus::write_corpus(std::path::Path::new(qakh::corpus::CORPUS_DIR), &entries)?;
    println!("wrote {} entries", entries.len());
    Ok(())
}
