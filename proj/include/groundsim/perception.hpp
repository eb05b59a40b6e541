#pragma once

// Synthetic stand-in for the vision stack: parametric scenes with feature
// vectors, an exemplar base of few-shot binary classifiers, and scene graphs
// of per-node name scores plus whole/part relation scores.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "groundsim/rng.hpp"
#include "json.hpp"

namespace groundsim::perception {

class PerceptionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Vec = std::vector<double>;

struct Box {
  double x = 0, y = 0, w = 0, h = 0;
  bool operator==(const Box&) const = default;
};

/// area(whole ∩ part) / area(part), in [0,1].
double relation_score(const Box& whole, const Box& part);

struct Property {
  std::string attribute;
  std::string part;
  auto operator<=>(const Property&) const = default;
};

using PropertySet = std::set<Property>;

struct DomainSpec {
  std::vector<std::string> classes;  // predicate names, in file order
  std::map<std::string, PropertySet> properties;
  std::vector<std::string> parts;
  std::vector<std::string> attributes;
  std::map<std::string, std::string> surface;  // predicate -> singular noun/adjective

  bool has_class(const std::string& c) const { return properties.count(c) != 0; }
  const PropertySet& properties_of(const std::string& c) const;

  static DomainSpec from_json(const nlohmann::json& j);
  static DomainSpec load(const std::string& path);
  /// The drinking-glass domain shipped as data/glasses.json.
  static DomainSpec glasses();
  nlohmann::json to_json() const;
  bool operator==(const DomainSpec&) const = default;
};

// Generator knobs. Noise and separation are the accuracy controls.
struct SimParams {
  int dim_class = 16;
  int dim_attr = 16;
  double class_noise = 0.55;        // isotropic noise on object class features
  double family_scale = 1.0;        // shared "glass" component
  double property_scale = 0.45;     // per-(attribute, part) direction in class space
  double class_offset = 0.25;       // class-specific offset
  double part_separation = 3.0;     // norm of part-kind prototypes
  double part_noise = 0.55;
  double attr_magnitude = 1.0;
  std::map<std::string, double> attr_magnitude_override;  // per-attribute attr_magnitude
  double attr_noise = 0.42;
  double relation_threshold = 0.75;  // tau_rel
  int distractors = 1;

  nlohmann::json to_json() const;
  static SimParams from_json(const nlohmann::json& j);
  static SimParams from_json(const nlohmann::json& j, SimParams base);
};

struct ScenePart {
  std::string id;
  std::string kind;
  Box bbox;
  std::set<std::string> attributes;
  Vec class_feature;
  Vec attr_feature;
};

struct SceneObject {
  std::string id;
  std::string cls;
  Box bbox;
  Vec class_feature;
  std::vector<ScenePart> parts;
};

struct Scene {
  std::vector<SceneObject> objects;  // objects[0] is the requested instance
};

/// Prototype geometry, fixed per run suite.
class FeatureModel {
 public:
  FeatureModel(DomainSpec domain, SimParams params, std::uint64_t suite_seed);

  const DomainSpec& domain() const { return domain_; }
  const SimParams& params() const { return params_; }

  Scene generate_scene(const std::string& target, std::uint64_t seed) const;
  SceneObject sample_object(const std::string& cls, std::uint64_t seed, const std::string& id, double slot_x) const;

  Vec sample_object_feature(const std::string& cls, Rng& rng) const;
  Vec sample_part_feature(const std::string& kind, Rng& rng) const;
  Vec sample_attr_feature(const std::set<std::string>& attrs, Rng& rng) const;

  const Vec& class_prototype(const std::string& cls) const { return class_proto_.at(cls); }
  const Vec& part_prototype(const std::string& part) const { return part_proto_.at(part); }
  const Vec& attr_direction(const std::string& attr) const { return attr_dir_.at(attr); }

 private:
  DomainSpec domain_;
  SimParams params_;
  std::map<std::string, Vec> class_proto_;
  std::map<std::string, Vec> part_proto_;
  std::map<std::string, Vec> attr_dir_;
};

enum class Space { Class, Attribute };

struct ClassifierParams {
  double one_sided_positive = 0.8;  // s1
  double one_sided_negative = 0.2;
  double beta = 14.0;  // log-loss minimizer on held-out prior concepts
  double delta = 1e-3;
  double bandwidth_floor = 1e-3;
  int neighbors = 5;  // k nearest per set; 0 averages the whole set
};

struct ConceptExemplars {
  Space space = Space::Class;
  std::vector<Vec> positive;
  std::vector<Vec> negative;
  double bandwidth = 1.0;
  bool operator==(const ConceptExemplars&) const = default;
};

class ExemplarBase {
 public:
  explicit ExemplarBase(int dim_class = 16, int dim_attr = 16, ClassifierParams params = {});

  int dim(Space s) const { return s == Space::Class ? dim_class_ : dim_attr_; }
  const ClassifierParams& params() const { return params_; }

  bool has(const std::string& name) const { return concepts_.count(name) != 0; }
  const ConceptExemplars* find(const std::string& name) const;
  std::vector<std::string> concepts(Space s) const;
  const std::map<std::string, ConceptExemplars>& all() const { return concepts_; }

  /// Adds to the positive or negative set, creating the name on first
  /// mention. The same vector never sits in both sets.
  void add_exemplar(const std::string& name, Space space, const Vec& feature, bool positive);
  /// "This is not wrong; this is truth": grows chi+_truth and chi-_wrong.
  void process_correction(const std::string& wrong, const std::string& truth, const Vec& feature);

  /// Few-shot score in [0,1]. Unknown concepts score 0.5.
  double classify(const std::string& name, const Vec& feature) const;

  nlohmann::json to_json() const;
  bool operator==(const ExemplarBase& o) const { return concepts_ == o.concepts_; }

 private:
  void refresh_bandwidth(ConceptExemplars& c);

  int dim_class_;
  int dim_attr_;
  ClassifierParams params_;
  std::map<std::string, ConceptExemplars> concepts_;
};

struct PriorStats {
  double part_accuracy = 0;
  double attribute_accuracy = 0;
  std::map<std::string, double> per_concept;
};

/// Seeds the exemplar base with part and attribute concepts (never the
/// glass classes) from sampled instances and non-instances.
/// `negative_ratio` scales the negative sample count relative to positives.
void init_priors(ExemplarBase& xb, const FeatureModel& model, std::uint64_t seed, int per_polarity = 30,
                 double negative_ratio = 3.0);

/// Balanced held-out accuracy of the prior concepts at threshold 0.5.
PriorStats evaluate_priors(const ExemplarBase& xb, const FeatureModel& model, std::uint64_t seed,
                           int samples = 200);

struct SceneNode {
  std::string id;
  Box bbox;
  bool is_part = false;
  std::map<std::string, double> classes;
  std::map<std::string, double> attributes;
  bool operator==(const SceneNode&) const = default;
};

struct SceneEdge {
  std::string from;
  std::string to;
  std::map<std::string, double> relations;
  bool operator==(const SceneEdge&) const = default;
};

struct SceneGraph {
  std::vector<SceneNode> nodes;
  std::vector<SceneEdge> edges;

  const SceneNode* node(const std::string& id) const;
  /// Relation score, 0 when the edge or relation is absent.
  double relation(const std::string& from, const std::string& to, const std::string& rel = "have") const;
  /// Parts p with have(object, p) > 0, in node order.
  std::vector<std::string> part_candidates(const std::string& object) const;
  /// Every name name scored somewhere in the graph.
  std::set<std::string> vocabulary() const;

  nlohmann::json to_json() const;
  static SceneGraph from_json(const nlohmann::json& j);
  bool operator==(const SceneGraph&) const = default;
};

/// Scores every class-space name on every node and every attribute
/// name on part nodes. `extra_concepts` are scored at the empty-XB prior.
SceneGraph build_scene_graph(const Scene& scene, const ExemplarBase& xb,
                             const std::vector<std::pair<std::string, Space>>& extra_concepts = {});

}  // namespace groundsim::perception
