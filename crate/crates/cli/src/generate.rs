use std::fs;
use std::path::Path;

use ganit::io::{format_annotations, format_detections};
use ganit::synth::{generate_scene, Category, LayoutSpec, NoiseSpec};
use ganit::ClassMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::args::GenArgs;
use crate::error::CliError;
use crate::SCHEMA_VERSION;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SpecFile {
    layout: LayoutSpec,
    noise: NoiseSpec,
}

#[derive(Debug, Serialize)]
struct Meta<'a> {
    schema_version: u32,
    seed: u64,
    scenes: u64,
    layout: &'a LayoutSpec,
    noise: &'a NoiseSpec,
    images: Vec<ImageMeta>,
}

#[derive(Debug, Serialize)]
struct ImageMeta {
    image_id: String,
    category: Category,
    width_px: u32,
    height_px: u32,
    expressions: Vec<String>,
    objects: usize,
    detections: usize,
}

fn specs(args: &GenArgs) -> Result<(LayoutSpec, NoiseSpec), CliError> {
    let file = match &args.spec_file {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(CliError::io(path))?;
            serde_json::from_str::<SpecFile>(&text)
                .map_err(|e| CliError::Input { path: path.clone(), message: e.to_string() })?
        }
        None => SpecFile::default(),
    };
    let (mut layout, mut noise) = (file.layout, file.noise);
    let set = |slot: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *slot = v;
        }
    };
    set(&mut noise.drop_prob, args.noise_drop);
    set(&mut noise.spurious_rate, args.noise_spurious);
    set(&mut noise.class_flip_prob, args.noise_flip);
    set(&mut noise.box_noise, args.noise_box);
    set(&mut layout.jitter.position, args.jitter_pos);
    set(&mut layout.jitter.size, args.jitter_size);
    set(&mut layout.scale_jitter, args.scale_jitter);
    set(&mut layout.shear, args.shear);
    noise.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok((layout, noise))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(CliError::io(path))
}

/// Writes the scene directory and returns the number of scenes.
pub fn run(args: &GenArgs, out: &Path, class_map: &ClassMap, seed: u64) -> Result<u64, CliError> {
    let (layout, noise) = specs(args)?;
    let ann_dir = out.join("annotations");
    let det_dir = out.join("detections");
    for dir in [&ann_dir, &det_dir] {
        fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    }
    let images = (0..args.scenes)
        .into_par_iter()
        .map(|i| {
            let scene = generate_scene(i, seed, &layout, &noise, class_map).map_err(|e| CliError::Usage(e.to_string()))?;
            let id = &scene.ground_truth.image_id;
            write(&ann_dir.join(format!("{id}.txt")), &format_annotations(&scene.ground_truth.objects))?;
            write(&det_dir.join(format!("{id}.txt")), &format_detections(&scene.detections))?;
            Ok(ImageMeta {
                image_id: id.clone(),
                category: scene.category,
                width_px: scene.ground_truth.width_px,
                height_px: scene.ground_truth.height_px,
                objects: scene.ground_truth.objects.len(),
                detections: scene.detections.len(),
                expressions: scene.expressions,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let meta = Meta { schema_version: SCHEMA_VERSION, seed, scenes: args.scenes, layout: &layout, noise: &noise, images };
    let json = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    write(&out.join("images.meta"), &(json + "\n"))?;
    Ok(args.scenes)
}
