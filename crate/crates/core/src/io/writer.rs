use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use hdf5::types::VarLenUnicode;
use hdf5::{File, Group, H5Type};
use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result};
use crate::model::{check_quantity_name, Mesh, ResType, ResultArray, ResultContainer};

use super::*;

/// Writes `.cfs` files. Each writer owns one newly created file.
pub struct CfsWriter {
    file: File,
    path: PathBuf,
}

impl std::fmt::Debug for CfsWriter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CfsWriter").field("path", &self.path).finish()
    }
}

fn vlu(s: &str) -> Result<VarLenUnicode> {
    s.parse::<VarLenUnicode>()
        .map_err(|e| Error::InvalidArgument(format!("string '{s}' cannot be stored: {e}")))
}

fn write_attr<T: H5Type>(group: &Group, name: &str, value: &T) -> Result<()> {
    group.new_attr::<T>().create(name)?.write_scalar(value)?;
    Ok(())
}

fn write_str_attr(group: &Group, name: &str, value: &str) -> Result<()> {
    write_attr(group, name, &vlu(value)?)
}

fn write_1d<T: H5Type + Clone>(group: &Group, name: &str, values: &[T]) -> Result<()> {
    let ds = group.new_dataset::<T>().shape([values.len()]).create(name)?;
    if !values.is_empty() {
        ds.write(&Array1::from(values.to_vec()))?;
    }
    Ok(())
}

fn write_2d<T: H5Type>(group: &Group, name: &str, values: &Array2<T>) -> Result<()> {
    let ds = group.new_dataset::<T>().shape(values.dim()).create(name)?;
    if !values.is_empty() {
        ds.write(values)?;
    }
    Ok(())
}

fn write_strings(group: &Group, name: &str, values: &[String]) -> Result<()> {
    let v: Vec<VarLenUnicode> = values.iter().map(|s| vlu(s)).collect::<Result<_>>()?;
    write_1d(group, name, &v)
}

fn child(group: &Group, name: &str) -> Result<Group> {
    if path_exists(&group, name) {
        Ok(group.group(name)?)
    } else {
        Ok(group.create_group(name)?)
    }
}

fn defined_on_code(res_type: ResType) -> u32 {
    match res_type {
        ResType::Node => 1,
        ResType::Element => 4,
        ResType::Region => 7,
    }
}

fn entity_group(res_type: ResType) -> &'static str {
    match res_type {
        ResType::Node => "Nodes",
        _ => "Elements",
    }
}

impl CfsWriter {
    /// Creates (or truncates) the file at `path`.
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::create(&path)?;
        Ok(CfsWriter { file, path })
    }

    /// Writes the mesh and, when given and non-empty, the results.
    pub fn create_file(&self, mesh: &Mesh, result: Option<&ResultContainer>) -> Result<()> {
        if let Some(result) = result {
            validate_results(mesh, result)?;
        }
        self.write_mesh(mesh)?;
        if let Some(result) = result.filter(|r| !r.is_empty()) {
            self.write_results(result)?;
        }
        self.file.flush()?;
        Ok(())
    }

    /// Adds one more multi-step of results to a file written by
    /// [`create_file`](Self::create_file). Fails if that multi-step id is
    /// already present.
    pub fn add_multi_step(&self, mesh: &Mesh, result: &ResultContainer) -> Result<()> {
        validate_results(mesh, result)?;
        let ms_name = multi_step_name(result.multi_step_id());
        for base in ["Results/Mesh", "Results/History"] {
            if path_exists(&self.file, &format!("{base}/{ms_name}")) {
                return Err(Error::InvalidResult(format!(
                    "{} already contains {base}/{ms_name}",
                    self.path.display()
                )));
            }
        }
        if !result.is_empty() {
            self.write_results(result)?;
        }
        self.file.flush()?;
        Ok(())
    }

    fn write_mesh(&self, mesh: &Mesh) -> Result<()> {
        let root = self.file.create_group(MESH)?;
        write_attr(&root, "Dimension", &mesh.info().dimension)?;

        let nodes = root.create_group("Nodes")?;
        let coords = Array2::from_shape_fn((mesh.num_nodes(), 3), |(i, k)| mesh.coordinates()[i][k]);
        write_2d(&nodes, "Coordinates", &coords)?;

        let elements = root.create_group("Elements")?;
        let types: Vec<i32> = mesh.element_types().iter().map(|t| t.code()).collect();
        write_1d(&elements, "Types", &types)?;
        let conn = Array2::from_shape_vec(
            (mesh.num_elements(), mesh.connectivity_width()),
            mesh.connectivity().to_vec(),
        )
        .expect("connectivity is rectangular");
        write_2d(&elements, "Connectivity", &conn)?;

        let regions = root.create_group("Regions")?;
        for region in mesh.regions() {
            let g = regions.create_group(region.name())?;
            write_1d(&g, "Nodes", region.node_ids())?;
            write_1d(&g, "Elements", region.element_ids())?;
            write_attr(&g, "Dimension", &region.dimension())?;
            write_attr(&g, "IsGroup", &(region.is_group() as u8))?;
        }
        Ok(())
    }

    fn write_results(&self, result: &ResultContainer) -> Result<()> {
        let results = child(&self.file, "Results")?;
        let ms_name = multi_step_name(result.multi_step_id());
        let (fields, history): (Vec<&ResultArray>, Vec<&ResultArray>) =
            result.arrays().iter().partition(|a| !a.is_history());

        for a in result.arrays() {
            check_quantity_name(a.quantity());
        }

        if !fields.is_empty() {
            let ms = child(&child(&results, "Mesh")?, &ms_name)?;
            write_str_attr(&ms, "AnalysisType", result.analysis_type().as_str())?;

            // union of field step values, sorted
            let mut steps: Vec<f64> = fields.iter().flat_map(|a| a.step_values().iter().copied()).collect();
            steps.sort_by(f64::total_cmp);
            steps.dedup_by(|a, b| a.to_bits() == b.to_bits());
            write_attr(&ms, "LastStepNum", &(steps.len() as u32))?;
            write_attr(&ms, "LastStepValue", steps.last().unwrap_or(&0.0))?;

            write_descriptions(&ms, &fields, &steps)?;

            let step_groups: Vec<Group> = steps
                .iter()
                .enumerate()
                .map(|(k, v)| {
                    let g = ms.create_group(&format!("Step_{}", k + 1))?;
                    write_attr(&g, "StepValue", v)?;
                    Ok(g)
                })
                .collect::<Result<_>>()?;

            for a in &fields {
                let re = a.data().real_part();
                let im = a.is_complex().then(|| a.data().imag_part());
                for (i, v) in a.step_values().iter().enumerate() {
                    let k = steps.iter().position(|s| s.to_bits() == v.to_bits()).unwrap();
                    let g = child(&child(&step_groups[k], a.quantity())?, a.region())?;
                    let g = g.create_group(entity_group(a.res_type()))?;
                    let slice = re.index_axis(Axis(0), i).into_dimensionality().unwrap().to_owned();
                    write_2d::<f64>(&g, "Real", &slice)?;
                    if let Some(im) = &im {
                        let slice = im.index_axis(Axis(0), i).into_dimensionality().unwrap().to_owned();
                        write_2d::<f64>(&g, "Imag", &slice)?;
                    }
                }
            }
        }

        if !history.is_empty() {
            let ms = child(&child(&results, "History")?, &ms_name)?;
            write_str_attr(&ms, "AnalysisType", result.analysis_type().as_str())?;
            for a in &history {
                let g = child(&child(&ms, a.quantity())?, a.region())?;
                let re = a.data().real_part().into_dimensionality().unwrap();
                write_2d::<f64>(&g, "Real", &re)?;
                if a.is_complex() {
                    let im = a.data().imag_part().into_dimensionality().unwrap();
                    write_2d::<f64>(&g, "Imag", &im)?;
                }
                write_1d(&g, "StepValues", a.step_values())?;
                write_strings(&g, "DOFNames", a.dim_names())?;
            }
        }
        Ok(())
    }
}

fn write_descriptions(ms: &Group, fields: &[&ResultArray], steps: &[f64]) -> Result<()> {
    let mut by_quantity: BTreeMap<&str, Vec<&ResultArray>> = BTreeMap::new();
    for a in fields {
        by_quantity.entry(a.quantity()).or_default().push(a);
    }
    let desc = ms.create_group("ResultDescription")?;
    for (quantity, arrays) in by_quantity {
        let first = arrays[0];
        if let Some(other) = arrays.iter().find(|a| a.dim_names() != first.dim_names()) {
            return Err(Error::InvalidResult(format!(
                "quantity '{quantity}' has inconsistent dim names on regions '{}' and '{}'",
                first.region(),
                other.region()
            )));
        }
        let g = desc.create_group(quantity)?;
        write_strings(&g, "DOFNames", first.dim_names())?;
        write_1d(&g, "DefinedOn", &[defined_on_code(first.res_type())])?;
        let regions: Vec<String> = arrays.iter().map(|a| a.region().to_string()).collect();
        write_strings(&g, "EntityNames", &regions)?;
        write_1d(&g, "NumDOFs", &[first.num_dims() as u32])?;
        let mut own: Vec<f64> = arrays.iter().flat_map(|a| a.step_values().iter().copied()).collect();
        own.sort_by(f64::total_cmp);
        own.dedup_by(|a, b| a.to_bits() == b.to_bits());
        let numbers: Vec<u32> = own
            .iter()
            .map(|v| steps.iter().position(|s| s.to_bits() == v.to_bits()).unwrap() as u32 + 1)
            .collect();
        write_1d(&g, "StepNumbers", &numbers)?;
        write_1d(&g, "StepValues", &own)?;
    }
    Ok(())
}

/// Checks that every array refers to an existing region with matching size.
pub(crate) fn validate_results(mesh: &Mesh, result: &ResultContainer) -> Result<()> {
    for a in result.arrays() {
        let region = mesh.region(a.region())?;
        let expected = match a.res_type() {
            ResType::Node => region.num_nodes(),
            ResType::Element => region.num_elements(),
            ResType::Region => continue,
        };
        if a.num_dofs() != expected {
            return Err(Error::ShapeMismatch(format!(
                "'{}' on region '{}' has {} DOFs, region has {expected} {}",
                a.quantity(),
                a.region(),
                a.num_dofs(),
                if a.res_type() == ResType::Node { "nodes" } else { "elements" }
            )));
        }
    }
    Ok(())
}
