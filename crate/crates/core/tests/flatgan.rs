use currentkit::autodiff::{checkpoint, Activation, MlpSpec, Tape};
use currentkit::flatgan::{build_circle_dataset, data_term, train, NeuralForm, TrainConfig};

fn tiny(k: usize) -> TrainConfig {
    TrainConfig {
        k,
        epochs: 4,
        eval_samples: 32,
        walk_points: 16,
        eval_every: 2,
        snapshots: vec![2],
        generator: MlpSpec::uniform(&[6, 16, 2], Activation::LeakyRelu).unwrap(),
        omega0: MlpSpec::uniform(&[2, 16, 1], Activation::LeakyRelu).unwrap(),
        omega1: MlpSpec::uniform(&[2, 16, 2], Activation::LeakyRelu).unwrap(),
        ..TrainConfig::default()
    }
}

#[test]
fn final_checkpoint_restores_the_networks() {
    let data = build_circle_dataset(5, 1.0, 0).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (gan, report) = train(&tiny(1), &data, Some(dir.path())).unwrap();
    assert_eq!(report.epochs, 4);
    let (manifest, nets, scalars) = checkpoint::load(&dir.path().join("checkpoints/epoch_4.bin")).unwrap();
    assert_eq!(manifest.step, 4);
    let names: Vec<&str> = nets.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["generator", "omega0", "omega1"]);
    assert_eq!(nets[0].1, gan.generator.net);
    assert_eq!(Some(&nets[2].1), gan.discriminator.omega1.as_ref());
    assert_eq!(scalars, vec![gan.discriminator.alpha]);
    assert!(dir.path().join("checkpoints/epoch_2.bin").exists());

    let metrics = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    assert_eq!(metrics.lines().count(), 5);
}

#[test]
fn trained_critic_as_form_matches_data_term() {
    let data = build_circle_dataset(5, 1.0, 3).unwrap();
    for k in [0, 1] {
        let (gan, _) = train(&tiny(k), &data, None).unwrap();
        let mut model = gan.discriminator.clone();
        if k == 1 {
            // the form view keeps only the linear part at grade 1
            model.omega0 = None;
        }
        let tape = Tape::new();
        let expected = data_term(&tape, &model.on_tape(&tape), &data, k).unwrap().scalar();
        let via_form = data
            .to_current(k)
            .unwrap()
            .evaluate(&NeuralForm::new(model))
            .unwrap();
        assert!((via_form - expected).abs() < 1e-10, "k={k}: {via_form} vs {expected}");
    }
}

#[test]
fn grade_above_data_is_rejected() {
    let mut data = build_circle_dataset(5, 1.0, 0).unwrap();
    data.tangents.clear();
    assert!(train(&tiny(1), &data, None).is_err());
}
