use std::path::Path;

use meshfield::error::{Error, Result};
use meshfield::extras::{read_ensight_case, read_stl};
use meshfield::interp::{
    build_idw, build_projection, cell2node_matrix, node2cell_matrix, rbf_apply, rbf_gradient, DofSpace, IdwConfig,
    InterpolationMatrix, ProjectionConfig, RbfConfig, RbfMode,
};
use meshfield::io::{read_file, read_mesh, write_file, CfsReader, CfsWriter};
use meshfield::model::{compute_centroids, Mesh, Point3, ResType, ResultArray, ResultContainer};
use meshfield::signal::{field_fft_with, time_derivative, FftOptions};
use meshfield::transform::{fit_mesh_with, transform_mesh_data, FitOptions, RigidTransform};

use crate::{Command, InputFormat, InterpolateArgs, Method};

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Info { file } => info(&file),
        Command::Convert { input, output, from } => convert(&input, &output, from),
        Command::Interpolate(args) => interpolate(&args),
        Command::Derivative {
            input,
            output,
            boundary,
            quantity,
        } => map_arrays(&input, &output, &quantity, |a| {
            let d = time_derivative(a, boundary)?;
            if !d.untreated.is_empty() {
                println!("{}: untreated steps {:?}", d.result.quantity(), d.untreated);
            }
            Ok(d.result)
        }),
        Command::Fft {
            input,
            output,
            hann,
            quantity,
        } => map_arrays(&input, &output, &quantity, |a| field_fft_with(a, &FftOptions { hann_window: hann })),
        Command::Fit {
            source,
            target,
            source_region,
            target_region,
            seed,
        } => fit(&source, &target, source_region, target_region, seed),
        Command::Transform {
            input,
            output,
            euler,
            translate,
            degrees,
            regions,
        } => transform(&input, &output, &euler, &translate, degrees, &regions),
    }
}

fn info(path: &Path) -> Result<()> {
    let reader = CfsReader::open(path)?;
    let mesh = reader.mesh()?;
    let info = mesh.info();
    println!("file: {}", path.display());
    println!("num_nodes: {}", info.num_nodes);
    println!("num_elements: {}", info.num_elements);
    println!("dimension: {}", info.dimension);
    for (t, n) in &info.element_counts {
        println!("  {t}: {n}");
    }
    println!("regions:");
    for r in mesh.regions() {
        println!(
            "  {} (dim {}, {} nodes, {} elements{})",
            r.name(),
            r.dimension(),
            r.num_nodes(),
            r.num_elements(),
            if r.is_group() { ", group" } else { "" }
        );
    }
    if !reader.has_results() {
        println!("no results");
        return Ok(());
    }
    for id in reader.multi_step_ids()? {
        let c = reader.multi_step_data(id)?;
        let steps = c.step_values();
        println!(
            "multi-step {id}: {}, {} steps ({} .. {})",
            c.analysis_type(),
            steps.len(),
            steps.first().copied().unwrap_or(0.0),
            steps.last().copied().unwrap_or(0.0)
        );
        for a in c.arrays() {
            println!(
                "  {} on {} [{:?}] shape {:?}{}",
                a.quantity(),
                a.region(),
                a.res_type(),
                a.data().shape(),
                if a.is_complex() { " complex" } else { "" }
            );
        }
    }
    Ok(())
}

fn convert(input: &Path, output: &Path, from: InputFormat) -> Result<()> {
    match from {
        InputFormat::Stl => {
            let mesh = read_stl(input)?;
            write_file(output, &mesh, None)?;
            println!("{} nodes, {} elements", mesh.num_nodes(), mesh.num_elements());
        }
        InputFormat::Ensight => {
            let (mesh, res) = read_ensight_case(input)?;
            write_file(output, &mesh, Some(&res))?;
            println!("{} nodes, {} elements, {} result arrays", mesh.num_nodes(), mesh.num_elements(), res.arrays().len());
        }
        InputFormat::Cfs => {
            let reader = CfsReader::open(input)?;
            let mesh = reader.mesh()?;
            let ids = if reader.has_results() { reader.multi_step_ids()? } else { Vec::new() };
            let writer = CfsWriter::create(output)?;
            match ids.split_first() {
                None => writer.create_file(&mesh, None)?,
                Some((&first, rest)) => {
                    writer.create_file(&mesh, Some(&reader.multi_step_data(first)?))?;
                    for &id in rest {
                        writer.add_multi_step(&mesh, &reader.multi_step_data(id)?)?;
                    }
                }
            }
            println!("{} nodes, {} elements, {} multi-steps", mesh.num_nodes(), mesh.num_elements(), ids.len());
        }
    }
    Ok(())
}

fn only_region(mesh: &Mesh, what: &str) -> Result<String> {
    match mesh.regions() {
        [r] => Ok(r.name().to_string()),
        rs => Err(Error::InvalidArgument(format!(
            "{what} mesh has {} regions ({}); choose one with --{what}-region",
            rs.len(),
            rs.iter().map(|r| r.name()).collect::<Vec<_>>().join(", ")
        ))),
    }
}

fn target_region(mesh: &Mesh, source_region: &str, requested: Option<&str>) -> Result<String> {
    if let Some(r) = requested {
        return Ok(mesh.region(r)?.name().to_string());
    }
    if mesh.region(source_region).is_ok() {
        return Ok(source_region.to_string());
    }
    only_region(mesh, "target")
}

fn points(mesh: &Mesh, region: &str, res_type: ResType) -> Result<Vec<Point3>> {
    let r = mesh.region(region)?;
    match res_type {
        ResType::Node => Ok(mesh.region_points(r)),
        ResType::Element => compute_centroids(mesh, r),
        ResType::Region => Err(Error::InvalidArgument("history data has no location".into())),
    }
}

fn eligible(method: Method, a: &ResultArray) -> bool {
    match method {
        Method::N2c | Method::Projection => a.res_type() == ResType::Node,
        Method::C2n => a.res_type() == ResType::Element,
        Method::Idw | Method::Rbf => !a.is_history(),
    }
}

fn interpolate(args: &InterpolateArgs) -> Result<()> {
    let (smesh, sres) = read_file(&args.source)?;
    let tmesh = if args.target == args.source { smesh.clone() } else { read_mesh(&args.target)? };
    if let Some(r) = &args.source_region {
        smesh.region(r)?;
    }
    let arrays: Vec<&ResultArray> = sres
        .arrays()
        .iter()
        .filter(|a| args.quantity.is_empty() || args.quantity.iter().any(|q| q == a.quantity()))
        .filter(|a| args.source_region.as_deref().is_none_or(|r| r == a.region()))
        .filter(|a| eligible(args.method, a))
        .collect();
    if arrays.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no source results suitable for {:?} in {}",
            args.method,
            args.source.display()
        )));
    }
    let target_rt = if args.to_elements { ResType::Element } else { ResType::Node };
    let mut out = Vec::new();
    for a in arrays {
        let treg = target_region(&tmesh, a.region(), args.target_region.as_deref())?;
        let source = DofSpace::new(a.region(), a.res_type());
        let matrix: Option<InterpolationMatrix> = match args.method {
            Method::N2c => Some(node2cell_matrix(&tmesh, &treg)?),
            Method::C2n => Some(cell2node_matrix(&tmesh, &treg)?),
            Method::Idw => {
                let cfg = IdwConfig {
                    neighbors: args.neighbors,
                    exponent: args.exponent,
                    direction: args.direction,
                };
                let m = build_idw(
                    &points(&smesh, a.region(), a.res_type())?,
                    &points(&tmesh, &treg, target_rt)?,
                    &cfg,
                )?;
                Some(m.with_spaces(source, DofSpace::new(treg.clone(), target_rt)))
            }
            Method::Projection => {
                let (Some(max_d), Some(radius)) = (args.max_distance, args.search_radius) else {
                    return Err(Error::InvalidArgument(
                        "projection needs --max_distance and --search_radius".into(),
                    ));
                };
                let m = build_projection(&smesh, a.region(), &tmesh, &treg, &ProjectionConfig::new(max_d, radius))?;
                Some(m.with_spaces(source, DofSpace::new(treg.clone(), ResType::Node)))
            }
            Method::Rbf => None,
        };
        let result = match matrix {
            Some(m) => {
                println!(
                    "{} on '{}' -> '{}': {} of {} rows unmatched",
                    a.quantity(),
                    a.region(),
                    treg,
                    m.unmatched_count(),
                    m.num_rows()
                );
                m.apply(a)?
            }
            None => {
                let cfg = RbfConfig {
                    kernel: args.kernel,
                    epsilon: args.epsilon,
                    smoothing: args.smoothing,
                    polynomial_tail: None,
                    mode: if args.local {
                        RbfMode::Local {
                            neighbors: args.neighbors,
                            min_neighbors: args.min_neighbors,
                            radius_factor: args.radius_factor,
                        }
                    } else {
                        RbfMode::Global
                    },
                };
                let src = points(&smesh, a.region(), a.res_type())?;
                let dst = points(&tmesh, &treg, target_rt)?;
                let r = if args.gradient {
                    gradient_array(&src, a, &dst, &cfg, &treg, target_rt)?
                } else {
                    rbf_apply(&src, a, &dst, &cfg, &DofSpace::new(treg.clone(), target_rt))?
                };
                println!("{} on '{}' -> '{}': 0 of {} rows unmatched", a.quantity(), a.region(), treg, dst.len());
                r
            }
        };
        out.push(result);
    }
    write_file(&args.output, &tmesh, Some(&ResultContainer::from_arrays(out)?))
}

/// RBF gradient of every step and component, stored as `D * 3` components
/// ordered (component, axis).
fn gradient_array(
    src: &[Point3],
    a: &ResultArray,
    dst: &[Point3],
    cfg: &RbfConfig,
    region: &str,
    res_type: ResType,
) -> Result<ResultArray> {
    let v = a
        .real_view3()
        .ok_or_else(|| Error::InvalidArgument(format!("gradient of complex '{}' is not supported", a.quantity())))?;
    let (n, _, d) = v.dim();
    let mut data = ndarray::Array3::<f64>::zeros((n, dst.len(), d * 3));
    for s in 0..n {
        let g = rbf_gradient(src, v.index_axis(ndarray::Axis(0), s), dst, cfg)?;
        for ((e, c, k), x) in g.indexed_iter() {
            data[[s, e, c * 3 + k]] = *x;
        }
    }
    let names: Vec<String> = a
        .dim_names()
        .iter()
        .flat_map(|n| ["x", "y", "z"].map(|ax| if d == 1 { format!("d{ax}") } else { format!("{n}_d{ax}") }))
        .collect();
    ResultArray::builder(format!("{}_grad", a.quantity()), region, res_type)
        .analysis(a.analysis_type())
        .steps(a.step_values().to_vec())
        .dim_names(names)
        .multi_step(a.multi_step_id())
        .build(data)
}

/// Applies `f` to the selected arrays of multi-step 1 and writes the results
/// with the input mesh.
fn map_arrays(
    input: &Path,
    output: &Path,
    quantities: &[String],
    mut f: impl FnMut(&ResultArray) -> Result<ResultArray>,
) -> Result<()> {
    let (mesh, res) = read_file(input)?;
    let selected: Vec<&ResultArray> = res
        .arrays()
        .iter()
        .filter(|a| quantities.is_empty() || quantities.iter().any(|q| q == a.quantity()))
        .collect();
    if selected.is_empty() {
        return Err(Error::InvalidArgument(format!("no matching results in {}", input.display())));
    }
    let out = selected.into_iter().map(&mut f).collect::<Result<Vec<_>>>()?;
    write_file(output, &mesh, Some(&ResultContainer::from_arrays(out)?))
}

fn fit(source: &Path, target: &Path, source_region: Option<String>, target_region: Option<String>, seed: u64) -> Result<()> {
    let src = read_mesh(source)?;
    let tgt = read_mesh(target)?;
    let sr = match source_region {
        Some(r) => r,
        None => only_region(&src, "source")?,
    };
    let tr = match target_region {
        Some(r) => r,
        None => target_region_default(&tgt, &sr)?,
    };
    let opts = FitOptions {
        seed,
        ..FitOptions::default()
    };
    let fit = fit_mesh_with(&src, &sr, &tgt, &tr, None, &opts, &mut |_, _| {})?;
    log::info!("objective {} after {} iterations", fit.objective, fit.iterations);
    let t = fit.transform.translation;
    let [a, b, g] = fit.transform.euler_angles;
    println!("{} {} {} {} {} {}", t[0], t[1], t[2], a, b, g);
    Ok(())
}

fn target_region_default(mesh: &Mesh, source_region: &str) -> Result<String> {
    target_region(mesh, source_region, None)
}

fn parse_triple(s: &str, flag: &str) -> Result<[f64; 3]> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::InvalidArgument(format!("--{flag} expects three comma-separated numbers, got '{s}'")))?;
    <[f64; 3]>::try_from(parts)
        .map_err(|_| Error::InvalidArgument(format!("--{flag} expects three comma-separated numbers, got '{s}'")))
}

fn transform(input: &Path, output: &Path, euler: &str, translate: &str, degrees: bool, regions: &[String]) -> Result<()> {
    let mut angles = parse_triple(euler, "euler")?;
    if degrees {
        angles = angles.map(f64::to_radians);
    }
    let tr = RigidTransform::new(parse_triple(translate, "translate")?, angles);
    let (mesh, res) = read_file(input)?;
    let names: Vec<&str> = regions.iter().map(String::as_str).collect();
    let (vectors, others): (Vec<ResultArray>, Vec<ResultArray>) = res.into_arrays().into_iter().partition(|a| {
        !a.is_history() && a.num_dims() == 3 && (names.is_empty() || names.contains(&a.region()))
    });
    let (moved, rotated) = transform_mesh_data(&mesh, &names, &tr, &vectors)?;
    let arrays: Vec<ResultArray> = rotated.into_iter().chain(others).collect();
    let container = if arrays.is_empty() { None } else { Some(ResultContainer::from_arrays(arrays)?) };
    write_file(output, &moved, container.as_ref())
}
