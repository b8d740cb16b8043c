use std::fs;
use std::path::Path;

use super::AppScanError;

/// Namespace of platform attributes (`android:`).
pub const ANDROID_NS: &str = "http://schemas.android.com/apk/res/android";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub min_sdk: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XmlAttr {
    pub namespace: Option<String>,
    pub name: String,
    pub value: String,
    pub line: u32,
}

impl XmlAttr {
    pub fn is_platform(&self) -> bool {
        self.namespace.as_deref() == Some(ANDROID_NS)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XmlElement {
    pub tag: String,
    pub line: u32,
    pub attributes: Vec<XmlAttr>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResourceFile {
    /// Path relative to the bundle root, `/`-separated.
    pub path: String,
    pub res_type: String,
    /// Directory name without its `-vK` segment; files shadow each other only within a family.
    pub family: String,
    /// K from `-vK`, 0 when unqualified.
    pub qualifier_level: u32,
    pub logical_name: String,
    /// Elements in document order, root first.
    pub elements: Vec<XmlElement>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppBundle {
    pub manifest: Manifest,
    pub resources: Vec<ResourceFile>,
    /// Files that were skipped, with the reason.
    pub skipped: Vec<(String, String)>,
}

fn parse_xml(text: &str) -> Result<roxmltree::Document<'_>, roxmltree::Error> {
    let opts = roxmltree::ParsingOptions { allow_dtd: true, ..Default::default() };
    roxmltree::Document::parse_with_options(text, opts)
}

/// `minSdkVersion` anywhere in the manifest, in any namespace; 1 when absent.
pub fn parse_manifest(text: &str) -> Result<Manifest, AppScanError> {
    let doc = parse_xml(text).map_err(|e| AppScanError::Manifest(e.to_string()))?;
    for node in doc.descendants().filter(|n| n.is_element()) {
        if let Some(a) = node.attributes().find(|a| a.name() == "minSdkVersion") {
            let v: u32 = a
                .value()
                .trim()
                .parse()
                .map_err(|_| AppScanError::Manifest(format!("minSdkVersion `{}` is not a level", a.value())))?;
            if v == 0 {
                return Err(AppScanError::Manifest("minSdkVersion must be at least 1".into()));
            }
            return Ok(Manifest { min_sdk: v });
        }
    }
    Ok(Manifest { min_sdk: 1 })
}

/// Splits `res/<dir>/<name>.xml` into (type, family, K, name).
pub fn parse_resource_path(path: &str) -> Option<(String, String, u32, String)> {
    let mut parts = path.split('/');
    let (res, dir, file) = (parts.next()?, parts.next()?, parts.next()?);
    if res != "res" || parts.next().is_some() {
        return None;
    }
    let name = file.strip_suffix(".xml")?;
    if name.is_empty() || dir.is_empty() {
        return None;
    }
    let mut level = 0;
    let mut kept = Vec::new();
    for seg in dir.split('-') {
        match seg.strip_prefix('v').and_then(|k| k.parse::<u32>().ok()) {
            Some(k) if !kept.is_empty() => level = k,
            _ => kept.push(seg),
        }
    }
    Some((kept[0].to_string(), kept.join("-"), level, name.to_string()))
}

pub fn parse_resource(path: &str, text: &str) -> Result<ResourceFile, String> {
    let (res_type, family, qualifier_level, logical_name) =
        parse_resource_path(path).ok_or_else(|| "not a res/<type>/<name>.xml path".to_string())?;
    let doc = parse_xml(text).map_err(|e| e.to_string())?;
    let line_of = |pos: usize| doc.text_pos_at(pos).row;
    let elements = doc
        .descendants()
        .filter(|n| n.is_element())
        .map(|n| XmlElement {
            tag: n.tag_name().name().to_string(),
            line: line_of(n.range().start),
            attributes: n
                .attributes()
                .map(|a| XmlAttr {
                    namespace: a.namespace().map(str::to_string),
                    name: a.name().to_string(),
                    value: a.value().to_string(),
                    line: line_of(a.range().start),
                })
                .collect(),
        })
        .collect();
    Ok(ResourceFile { path: path.to_string(), res_type, family, qualifier_level, logical_name, elements })
}

impl AppBundle {
    /// Builds a bundle from in-memory files; malformed resources are skipped.
    pub fn from_sources(manifest: &str, files: &[(String, String)]) -> Result<AppBundle, AppScanError> {
        let manifest = parse_manifest(manifest)?;
        let mut resources = Vec::new();
        let mut skipped = Vec::new();
        let mut files: Vec<&(String, String)> = files.iter().collect();
        files.sort_by(|a, b| a.0.cmp(&b.0));
        for (path, text) in files {
            match parse_resource(path, text) {
                Ok(r) => resources.push(r),
                Err(e) => skipped.push((path.clone(), e)),
            }
        }
        Ok(AppBundle { manifest, resources, skipped })
    }

    /// Reads `AndroidManifest.xml` and every `res/<dir>/<name>.xml` under `root`.
    pub fn load(root: &Path) -> Result<AppBundle, AppScanError> {
        if !root.is_dir() {
            return Err(AppScanError::NotADirectory(root.display().to_string()));
        }
        let manifest_path = root.join("AndroidManifest.xml");
        let manifest = fs::read_to_string(&manifest_path)
            .map_err(|e| AppScanError::Io(manifest_path.display().to_string(), e.to_string()))?;
        let mut files = Vec::new();
        let mut unreadable = Vec::new();
        let res = root.join("res");
        if res.is_dir() {
            let io = |p: &Path, e: std::io::Error| AppScanError::Io(p.display().to_string(), e.to_string());
            for dir in fs::read_dir(&res).map_err(|e| io(&res, e))? {
                let dir = dir.map_err(|e| io(&res, e))?.path();
                if !dir.is_dir() {
                    continue;
                }
                for f in fs::read_dir(&dir).map_err(|e| io(&dir, e))? {
                    let f = f.map_err(|e| io(&dir, e))?.path();
                    if f.extension().and_then(|x| x.to_str()) != Some("xml") {
                        continue;
                    }
                    let rel = format!(
                        "res/{}/{}",
                        dir.file_name().unwrap_or_default().to_string_lossy(),
                        f.file_name().unwrap_or_default().to_string_lossy()
                    );
                    match fs::read_to_string(&f) {
                        Ok(text) => files.push((rel, text)),
                        Err(e) => unreadable.push((rel, e.to_string())),
                    }
                }
            }
        }
        let mut bundle = AppBundle::from_sources(&manifest, &files)?;
        bundle.skipped.extend(unreadable);
        bundle.skipped.sort();
        Ok(bundle)
    }
}
