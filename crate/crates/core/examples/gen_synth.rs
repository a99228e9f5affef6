fn main() {
    let (graph, features, labels) = mixcurv::dataset::synthetic_tree_cycles(52, 8, 6);
    let bundle = mixcurv::dataset::DatasetBundle { graph, features, labels: Some(labels), name: "synth".into() };
    mixcurv::dataset::save_dataset(&bundle, std::path::Path::new("/tmp/synth")).unwrap();
    println!("written");
}
