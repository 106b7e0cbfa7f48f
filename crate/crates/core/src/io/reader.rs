use std::cell::RefCell;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use hdf5::types::{FixedAscii, FixedUnicode, TypeDescriptor, VarLenAscii, VarLenUnicode};
use hdf5::{Attribute, Dataset, File, Group, H5Type};
use ndarray::{Array2, Array3, ArrayD, Axis};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{
    AnalysisType, ElementType, Mesh, Region, ResType, ResultArray, ResultContainer, ResultData,
};

use super::*;

/// Read access to a `.cfs` file.
///
/// Every dataset read is recorded (see [`CfsReader::datasets_read`]), which
/// makes it possible to check that a read touched only the requested data.
pub struct CfsReader {
    file: File,
    path: PathBuf,
    trace: RefCell<Vec<String>>,
}

impl std::fmt::Debug for CfsReader {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CfsReader").field("path", &self.path).finish()
    }
}

fn read_string(attr: &Attribute) -> Result<String> {
    let s = match attr.dtype()?.to_descriptor()? {
        TypeDescriptor::VarLenUnicode => attr.read_scalar::<VarLenUnicode>()?.as_str().to_string(),
        TypeDescriptor::VarLenAscii => attr.read_scalar::<VarLenAscii>()?.as_str().to_string(),
        TypeDescriptor::FixedAscii(_) => attr.read_scalar::<FixedAscii<1024>>()?.as_str().to_string(),
        TypeDescriptor::FixedUnicode(_) => attr.read_scalar::<FixedUnicode<1024>>()?.as_str().to_string(),
        other => {
            return Err(Error::malformed(attr.name(), format!("expected a string attribute, found {other}")))
        }
    };
    Ok(s)
}

fn read_strings(ds: &Dataset) -> Result<Vec<String>> {
    let v = match ds.dtype()?.to_descriptor()? {
        TypeDescriptor::VarLenUnicode => ds
            .read_raw::<VarLenUnicode>()?
            .iter()
            .map(|s| s.as_str().to_string())
            .collect(),
        TypeDescriptor::VarLenAscii => ds
            .read_raw::<VarLenAscii>()?
            .iter()
            .map(|s| s.as_str().to_string())
            .collect(),
        TypeDescriptor::FixedAscii(_) => ds
            .read_raw::<FixedAscii<1024>>()?
            .iter()
            .map(|s| s.as_str().to_string())
            .collect(),
        other => {
            return Err(Error::malformed(ds.name(), format!("expected strings, found {other}")))
        }
    };
    Ok(v)
}

fn sorted_members(group: &Group, prefix: &str) -> Result<Vec<(u32, String)>> {
    let mut out: Vec<(u32, String)> = group
        .member_names()?
        .into_iter()
        .filter_map(|n| n.strip_prefix(prefix).and_then(|s| s.parse().ok()).map(|id| (id, n)))
        .collect();
    out.sort();
    Ok(out)
}

/// Per (quantity, region, res_type): list of (step value, real, imag).
type StepSlices = BTreeMap<(String, String, u8), Vec<(f64, Array2<f64>, Option<Array2<f64>>)>>;

fn res_type_key(rt: ResType) -> u8 {
    match rt {
        ResType::Node => 0,
        ResType::Element => 1,
        ResType::Region => 2,
    }
}

fn res_type_from_key(k: u8) -> ResType {
    match k {
        0 => ResType::Node,
        1 => ResType::Element,
        _ => ResType::Region,
    }
}

impl CfsReader {
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        if !path.exists() {
            return Err(Error::FileNotFound(path));
        }
        let file = File::open(&path).map_err(|e| {
            Error::malformed(path.display().to_string(), format!("not a readable HDF5 file ({e})"))
        })?;
        Ok(CfsReader {
            file,
            path,
            trace: RefCell::new(Vec::new()),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Absolute paths of all datasets read so far, in read order.
    pub fn datasets_read(&self) -> Vec<String> {
        self.trace.borrow().clone()
    }

    fn group(&self, path: &str) -> Result<Group> {
        self.file
            .group(path)
            .map_err(|_| Error::malformed(format!("/{path}"), "group missing"))
    }

    fn dataset(&self, path: &str) -> Result<Dataset> {
        let ds = self
            .file
            .dataset(path)
            .map_err(|_| Error::malformed(format!("/{path}"), "dataset missing"))?;
        self.trace.borrow_mut().push(format!("/{path}"));
        Ok(ds)
    }

    fn read_nd<T: H5Type>(&self, path: &str, ndim: usize) -> Result<ArrayD<T>> {
        let ds = self.dataset(path)?;
        if ds.ndim() != ndim {
            return Err(Error::malformed(
                format!("/{path}"),
                format!("expected rank {ndim}, found shape {:?}", ds.shape()),
            ));
        }
        if ds.size() == 0 {
            return Ok(ArrayD::from_shape_vec(ds.shape(), Vec::new()).unwrap());
        }
        ds.read_dyn::<T>()
            .map_err(|e| Error::malformed(format!("/{path}"), e.to_string()))
    }

    fn read_1d<T: H5Type>(&self, path: &str) -> Result<Vec<T>> {
        Ok(self.read_nd::<T>(path, 1)?.into_raw_vec())
    }

    fn read_2d<T: H5Type>(&self, path: &str) -> Result<Array2<T>> {
        Ok(self.read_nd::<T>(path, 2)?.into_dimensionality().unwrap())
    }

    fn attr_scalar<T: H5Type>(&self, group: &Group, name: &str) -> Result<T> {
        group
            .attr(name)
            .and_then(|a| a.read_scalar::<T>())
            .map_err(|_| Error::malformed(format!("{}@{name}", group.name()), "attribute missing or invalid"))
    }

    fn attr_string(&self, group: &Group, name: &str) -> Result<String> {
        let attr = group
            .attr(name)
            .map_err(|_| Error::malformed(format!("{}@{name}", group.name()), "attribute missing"))?;
        read_string(&attr)
    }

    pub fn has_results(&self) -> bool {
        path_exists(&self.file, "Results")
    }

    /// Reads the mesh: coordinates, elements and regions.
    pub fn mesh(&self) -> Result<Mesh> {
        self.group(MESH)?;
        let coords = self.read_2d::<f64>(COORDINATES)?;
        if coords.ncols() != 3 {
            return Err(Error::malformed(
                format!("/{COORDINATES}"),
                format!("expected 3 columns, found {}", coords.ncols()),
            ));
        }
        let coordinates = coords.rows().into_iter().map(|r| [r[0], r[1], r[2]]).collect();
        let types = self
            .read_1d::<i32>(ELEMENT_TYPES)?
            .into_iter()
            .map(ElementType::from_code)
            .collect::<Result<Vec<_>>>()?;
        let conn = self.read_2d::<u32>(CONNECTIVITY)?;
        if conn.nrows() != types.len() {
            return Err(Error::malformed(
                format!("/{CONNECTIVITY}"),
                format!("{} rows for {} element types", conn.nrows(), types.len()),
            ));
        }
        let width = conn.ncols();
        let connectivity = conn.as_standard_layout().iter().copied().collect();
        let mut mesh = Mesh::from_padded(coordinates, types, connectivity, width, Vec::new())?;

        if path_exists(&self.file, REGIONS) {
            let regions = self.group(REGIONS)?;
            for name in regions.member_names()? {
                let g = regions.group(&name)?;
                let nodes = self.read_1d::<u32>(&format!("{REGIONS}/{name}/Nodes"))?;
                let elements = self.read_1d::<u32>(&format!("{REGIONS}/{name}/Elements"))?;
                let dimension = self.attr_scalar::<u32>(&g, "Dimension")?;
                let is_group = g.attr("IsGroup").and_then(|a| a.read_scalar::<u8>()).unwrap_or(0) != 0;
                mesh.add_region(Region::new(name, dimension, nodes, elements, is_group)?)?;
            }
        }
        Ok(mesh)
    }

    /// Multi-step ids present under `/Results/Mesh` or `/Results/History`.
    pub fn multi_step_ids(&self) -> Result<Vec<u32>> {
        let mut ids = Vec::new();
        for base in [RESULTS_MESH, RESULTS_HISTORY] {
            if path_exists(&self.file, base) {
                ids.extend(sorted_members(&self.group(base)?, "MultiStep_")?.into_iter().map(|(id, _)| id));
            }
        }
        ids.sort_unstable();
        ids.dedup();
        Ok(ids)
    }

    /// Reads all arrays of one multi-step. Other multi-steps are not touched.
    pub fn multi_step_data(&self, multi_step_id: u32) -> Result<ResultContainer> {
        let available = self.multi_step_ids()?;
        if !available.contains(&multi_step_id) {
            return Err(Error::MissingMultiStep {
                requested: multi_step_id,
                available,
            });
        }
        let ms_name = multi_step_name(multi_step_id);
        let mesh_path = format!("{RESULTS_MESH}/{ms_name}");
        let hist_path = format!("{RESULTS_HISTORY}/{ms_name}");
        let mesh_part = path_exists(&self.file, &mesh_path);
        let hist_part = path_exists(&self.file, &hist_path);

        let mut analysis: Option<AnalysisType> = None;
        for (present, path) in [(mesh_part, &mesh_path), (hist_part, &hist_path)] {
            if !present {
                continue;
            }
            let at: AnalysisType = self.attr_string(&self.group(path)?, "AnalysisType")?.parse()?;
            if analysis.is_some_and(|a| a != at) {
                return Err(Error::malformed(path.clone(), "analysis type differs between mesh and history results"));
            }
            analysis = Some(at);
        }
        let analysis = analysis.expect("multi-step exists in at least one part");
        let mut container = ResultContainer::new(analysis, multi_step_id);

        if mesh_part {
            for a in self.read_field_arrays(&mesh_path, analysis, multi_step_id)? {
                container.push(a)?;
            }
        }
        if hist_part {
            for a in self.read_history_arrays(&hist_path, analysis, multi_step_id)? {
                container.push(a)?;
            }
        }
        Ok(container)
    }

    fn read_field_arrays(&self, ms_path: &str, analysis: AnalysisType, ms_id: u32) -> Result<Vec<ResultArray>> {
        let ms = self.group(ms_path)?;
        let mut steps: Vec<(f64, String)> = Vec::new();
        for (_, name) in sorted_members(&ms, "Step_")? {
            let g = ms.group(&name)?;
            steps.push((self.attr_scalar::<f64>(&g, "StepValue")?, name));
        }
        steps.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut slices: StepSlices = BTreeMap::new();
        for (value, step_name) in &steps {
            let step = ms.group(step_name)?;
            for quantity in step.member_names()? {
                let qg = step.group(&quantity)?;
                for region in qg.member_names()? {
                    let rg = qg.group(&region)?;
                    for (entity, rt) in [("Nodes", ResType::Node), ("Elements", ResType::Element)] {
                        if !path_exists(&rg, entity) {
                            continue;
                        }
                        let base = format!("{ms_path}/{step_name}/{quantity}/{region}/{entity}");
                        let re = self.read_2d::<f64>(&format!("{base}/Real"))?;
                        let im = if path_exists(&rg, &format!("{entity}/Imag")) {
                            let im = self.read_2d::<f64>(&format!("{base}/Imag"))?;
                            if im.dim() != re.dim() {
                                return Err(Error::malformed(format!("/{base}/Imag"), "shape differs from Real"));
                            }
                            Some(im)
                        } else {
                            None
                        };
                        slices
                            .entry((quantity.clone(), region.clone(), res_type_key(rt)))
                            .or_default()
                            .push((*value, re, im));
                    }
                }
            }
        }

        let mut arrays = Vec::with_capacity(slices.len());
        for ((quantity, region, rt), parts) in slices {
            let (m, d) = parts[0].1.dim();
            if let Some(bad) = parts.iter().find(|p| p.1.dim() != (m, d)) {
                return Err(Error::malformed(
                    format!("/{ms_path}/.../{quantity}/{region}"),
                    format!("step shapes differ: {:?} vs {:?}", (m, d), bad.1.dim()),
                ));
            }
            let is_complex = parts.iter().any(|p| p.2.is_some());
            let n = parts.len();
            let data = if is_complex {
                let mut a = Array3::<Complex64>::zeros((n, m, d));
                for (i, (_, re, im)) in parts.iter().enumerate() {
                    let mut s = a.index_axis_mut(Axis(0), i);
                    s.zip_mut_with(re, |c, &r| c.re = r);
                    if let Some(im) = im {
                        s.zip_mut_with(im, |c, &x| c.im = x);
                    }
                }
                ResultData::Complex(a.into_dyn())
            } else {
                let mut a = Array3::<f64>::zeros((n, m, d));
                for (i, (_, re, _)) in parts.iter().enumerate() {
                    a.index_axis_mut(Axis(0), i).assign(re);
                }
                ResultData::Real(a.into_dyn())
            };
            let dim_names = self.description_dof_names(ms_path, &quantity)?.filter(|names| names.len() == d);
            let mut b = ResultArray::builder(&quantity, &region, res_type_from_key(rt))
                .analysis(analysis)
                .steps(parts.iter().map(|p| p.0).collect())
                .complex(is_complex)
                .multi_step(ms_id);
            if let Some(names) = dim_names {
                b = b.dim_names(names);
            }
            arrays.push(b.build(data)?);
        }
        Ok(arrays)
    }

    fn description_dof_names(&self, ms_path: &str, quantity: &str) -> Result<Option<Vec<String>>> {
        let path = format!("{ms_path}/ResultDescription/{quantity}/DOFNames");
        if !path_exists(&self.file, &path) {
            return Ok(None);
        }
        Ok(Some(read_strings(&self.dataset(&path)?)?))
    }

    fn read_history_arrays(&self, ms_path: &str, analysis: AnalysisType, ms_id: u32) -> Result<Vec<ResultArray>> {
        let ms = self.group(ms_path)?;
        let mut arrays = Vec::new();
        for quantity in ms.member_names()? {
            let qg = ms.group(&quantity)?;
            for region in qg.member_names()? {
                let rg = qg.group(&region)?;
                let base = format!("{ms_path}/{quantity}/{region}");
                let re = self.read_2d::<f64>(&format!("{base}/Real"))?;
                let data = if path_exists(&rg, "Imag") {
                    let im = self.read_2d::<f64>(&format!("{base}/Imag"))?;
                    if im.dim() != re.dim() {
                        return Err(Error::malformed(format!("/{base}/Imag"), "shape differs from Real"));
                    }
                    let mut c = re.mapv(|r| Complex64::new(r, 0.0));
                    c.zip_mut_with(&im, |c, &x| c.im = x);
                    ResultData::Complex(c.into_dyn())
                } else {
                    ResultData::Real(re.into_dyn())
                };
                let is_complex = data.is_complex();
                let steps = if path_exists(&rg, "StepValues") {
                    self.read_1d::<f64>(&format!("{base}/StepValues"))?
                } else {
                    (1..=data.shape()[0]).map(|i| i as f64).collect()
                };
                let mut b = ResultArray::builder(&quantity, &region, ResType::Region)
                    .analysis(analysis)
                    .steps(steps)
                    .complex(is_complex)
                    .multi_step(ms_id);
                if path_exists(&rg, "DOFNames") {
                    let names = read_strings(&self.dataset(&format!("{base}/DOFNames"))?)?;
                    if names.len() == data.shape()[1] {
                        b = b.dim_names(names);
                    }
                }
                arrays.push(b.build(data)?);
            }
        }
        Ok(arrays)
    }
}
