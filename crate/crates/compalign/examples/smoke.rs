use compalign::*;

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "kittens".into());
    let (store_text, new_text): (String, String) = (
        std::fs::read_to_string(format!("/root/crate/crates/compalign-cli/corpora/{which}.store")).unwrap(),
        std::fs::read_to_string(format!("/root/crate/crates/compalign-cli/corpora/{which}.new")).unwrap(),
    );
    let store = PatternStore::load(&store_text).unwrap();
    let new = load_new_sequence(&new_text).unwrap();
    let t0 = std::time::Instant::now();
    let out = build_alignments(&store, &new, &BuildParams::default()).unwrap();
    println!("built {} alignments in {:?}", out.len(), t0.elapsed());
    for (i, a) in out.iter().enumerate().take(3) {
        let s = a.scores().unwrap();
        println!("--- #{i} CD={:.3} rows={:?}", s.compression_difference, a.pattern_id_list());
        let enc = derive_encoding(a);
        println!("encoding: {:?}", enc.code.iter().map(|s| s.as_str()).collect::<Vec<_>>());
        println!("inferred: {:?}", infer_unseen(a).iter().map(|(s, p)| (s.as_str(), p.as_str())).collect::<Vec<_>>());
        if i == 0 { println!("{}", render_alignment(a)); }
    }
}
