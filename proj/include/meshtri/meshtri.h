/* SPDX-License-Identifier: Apache-2.0 */
/*
 * C interface of libmeshtri.
 *
 * Objects are opaque handles created by mt_*_create/load/generate calls and
 * released with the matching mt_*_free (NULL is accepted). Every fallible
 * call returns an mt_status; on failure mt_last_error() describes the
 * problem for the calling thread until its next failing call.
 *
 * Arrays cross the boundary as caller-owned buffers. Calls that fill a
 * buffer take its capacity and report the needed size; passing a NULL
 * buffer only queries the size, and a short buffer yields
 * MT_BUFFER_TOO_SMALL. Point buffers count N x 3 points, not doubles.
 */
#ifndef MESHTRI_MESHTRI_H
#define MESHTRI_MESHTRI_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define MT_API __declspec(dllexport)
#else
#define MT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mt_status {
  MT_OK = 0,
  MT_INVALID_ARGUMENT = 1,
  MT_DIMENSION_MISMATCH,
  MT_SHAPE_MISMATCH,
  MT_NON_POSITIVE_DEPTH,
  MT_INVALID_DIMENSION,
  MT_DEGENERATE_INPUT,
  MT_INVALID_ROTATION,
  MT_PARSE_ERROR,
  MT_INVARIANT_VIOLATION,
  MT_IO_ERROR,
  MT_TARGET_TOO_SMALL,
  MT_NOT_NORMALIZED,
  MT_INVALID_SIGMA,
  MT_EMPTY_VIEW_LIST,
  MT_GATE_OUT_OF_RANGE,
  MT_INDEX_OUT_OF_RANGE,
  MT_NON_FINITE_COST,
  MT_INVALID_CONFIG,
  MT_LENGTH_MISMATCH,
  MT_BUFFER_TOO_SMALL = 100,
  MT_INTERNAL = 101
} mt_status;

typedef struct mt_model mt_model;
typedef struct mt_mesh mt_mesh;
typedef struct mt_subop mt_subop;
typedef struct mt_cameras mt_cameras;
typedef struct mt_scene mt_scene;
typedef struct mt_volume mt_volume;
typedef struct mt_fit_result mt_fit_result;
typedef struct mt_report mt_report;
typedef struct mt_run_config mt_run_config;

typedef struct mt_fit_config {
  double learning_rate;
  int iterations;
  double lambda_w;
  double lambda_z;
  double lambda_beta;
  double lambda_alpha;
  uint64_t seed;
  int joints_data_term; /* 0: sub-vertices, 1: regressed joints */
} mt_fit_config;

typedef struct mt_scene_config {
  int views;
  double pose_magnitude;
  double shape_magnitude;
  double yaw_range;
  double camera_radius;
  double focal;
  int image_size;
  double cuboid_side;
  double cuboid_yaw;
} mt_scene_config;

typedef struct mt_heatmap_options {
  int resolution;
  double sigma_pitch;
  double logit_noise;
  int zero;
  uint64_t noise_seed;
} mt_heatmap_options;

typedef struct mt_terms {
  double data, z, beta, wrist, alpha, reg, total;
} mt_terms;

typedef struct mt_metrics {
  double mpjpe_mm;
  double mpve_mm;
  double mean_angular_deg;
  double pck;
  double auc;
} mt_metrics;

/* Library */
MT_API const char* mt_version(void);
MT_API const char* mt_last_error(void);
MT_API const char* mt_status_name(mt_status status);

/* Heatmap storage for an L^3 x N float32 volume, in MB (1e6 bytes). */
MT_API mt_status mt_heatmap_megabytes(int resolution, int vertices, double* out_mb);

/* Body model */
MT_API mt_status mt_model_make_toy(uint64_t seed, int vertex_budget, mt_model** out);
MT_API mt_status mt_model_load(const char* path, mt_model** out);
MT_API mt_status mt_model_save(const mt_model* model, const char* path);
MT_API int mt_model_num_vertices(const mt_model* model);
MT_API mt_status mt_model_template_mesh(const mt_model* model, mt_mesh** out);
MT_API void mt_model_free(mt_model* model);

/* Triangle meshes */
MT_API mt_status mt_mesh_load_obj(const char* path, mt_mesh** out);
MT_API mt_status mt_mesh_save_obj(const mt_mesh* mesh, const char* path);
MT_API int mt_mesh_num_vertices(const mt_mesh* mesh);
MT_API int mt_mesh_num_faces(const mt_mesh* mesh);
MT_API void mt_mesh_free(mt_mesh* mesh);

/* Quadric decimation to target_n vertices; either output may be NULL. */
MT_API mt_status mt_decimate(const mt_mesh* mesh, int target_n, mt_mesh** out_mesh, mt_subop** out_op);

/* Sub-sampling operators */
MT_API mt_status mt_subop_load(const char* path, mt_subop** out);
MT_API mt_status mt_subop_save(const mt_subop* op, const char* path);
MT_API int mt_subop_size(const mt_subop* op);
MT_API void mt_subop_free(mt_subop* op);

/* Cameras: one calibration file or a rig array. */
MT_API mt_status mt_cameras_load(const char* path, mt_cameras** out);
MT_API int mt_cameras_count(const mt_cameras* cams);
MT_API void mt_cameras_free(mt_cameras* cams);

/* Per-vertex visibility of `mesh` from camera `index`; one byte per vertex. */
MT_API mt_status mt_visibility(const mt_mesh* mesh, const mt_cameras* cams, int index, int brute_force,
                               uint8_t* out, size_t capacity, size_t* out_count);

/* Point lists: {schema_version, points} JSON files, row-major N x 3. */
MT_API mt_status mt_points_load(const char* path, double* out, size_t capacity, size_t* out_count);
MT_API mt_status mt_points_save(const char* path, const double* points, size_t count);

/* Synthetic scenes */
MT_API void mt_scene_config_default(mt_scene_config* cfg);
MT_API mt_status mt_scene_generate(const mt_model* model, const mt_subop* op, uint64_t seed,
                                   const mt_scene_config* cfg, mt_scene** out);
MT_API mt_status mt_scene_save_bundle(const mt_scene* scene, const mt_model* model, const char* dir,
                                      const mt_volume* heatmaps);
/* The bundle's model is returned through out_model when non-NULL. */
MT_API mt_status mt_scene_load_bundle(const char* dir, mt_scene** out_scene, mt_model** out_model);
MT_API mt_status mt_scene_gt_sub(const mt_scene* scene, double* out, size_t capacity, size_t* out_count);
MT_API mt_status mt_scene_subop(const mt_scene* scene, mt_subop** out);
MT_API mt_status mt_scene_cameras(const mt_scene* scene, mt_cameras** out);
MT_API void mt_scene_free(mt_scene* scene);

/* Volumes and heatmaps */
MT_API void mt_heatmap_options_default(mt_heatmap_options* opts);
MT_API mt_status mt_scene_render_heatmaps(const mt_scene* scene, const mt_heatmap_options* opts, mt_volume** out);
MT_API mt_status mt_volume_load(const char* path, mt_volume** out);
MT_API mt_status mt_volume_save(const mt_volume* vol, const char* path);
MT_API int mt_volume_channels(const mt_volume* vol);
MT_API int mt_volume_resolution(const mt_volume* vol);
/* Normalizes each channel and decodes its soft-argmax; N x 3 row-major. */
MT_API mt_status mt_volume_decode(const mt_volume* logits, double* out, size_t capacity, size_t* out_count);
MT_API void mt_volume_free(mt_volume* vol);

/*
 * Splats the scene's visible sub-vertices into `channels`-channel feature
 * maps, unprojects them onto an L^3 copy of the scene grid and aggregates
 * the views. Writes the aggregate volume and the per-view confidence at the
 * cuboid center (one value per camera).
 */
MT_API mt_status mt_scene_triangulate(const mt_scene* scene, int channels, int resolution, mt_volume** out_aggregate,
                                      double* out_confidence, size_t capacity, size_t* out_count);

/* Fitting */
MT_API void mt_fit_config_default(mt_fit_config* cfg);
MT_API mt_status mt_fit_config_load(const char* path, mt_fit_config* cfg);
/* target is N x 3 sub-vertices (or 17 x 3 joints in joints mode). */
MT_API mt_status mt_fit(const mt_model* model, const double* target, size_t count, const mt_subop* op,
                        const mt_fit_config* cfg, mt_fit_result** out);
/* Rebuilds a result from the params block of a result JSON file. */
MT_API mt_status mt_fit_result_load(const mt_model* model, const char* path, const mt_fit_config* cfg,
                                    mt_fit_result** out);
MT_API mt_status mt_fit_result_save(const mt_fit_result* result, const char* json_path, const char* obj_path);
MT_API mt_status mt_fit_result_terms(const mt_fit_result* result, mt_terms* out);
MT_API void mt_fit_result_free(mt_fit_result* result);

/* Evaluation against a scene's ground truth */
MT_API mt_status mt_evaluate(const mt_fit_result* result, const mt_scene* scene, mt_report** out);
MT_API mt_status mt_report_values(const mt_report* report, mt_metrics* out);
MT_API mt_status mt_report_angular(const mt_report* report, double* out, size_t capacity, size_t* out_count);
MT_API mt_status mt_report_save_json(const mt_report* report, const char* path);
MT_API mt_status mt_report_save_csv(const mt_report* report, const char* path);
/* NUL-terminated JSON text; out_len excludes the terminator. */
MT_API mt_status mt_report_json(const mt_report* report, char* out, size_t capacity, size_t* out_len);
MT_API void mt_report_free(mt_report* report);

/* End-to-end pipeline */
MT_API mt_status mt_run_config_create(mt_run_config** out);
MT_API mt_status mt_run_config_load(const char* path, mt_run_config** out);
MT_API mt_status mt_run_config_set_seed(mt_run_config* cfg, uint64_t seed);
MT_API mt_status mt_run_config_set_views(mt_run_config* cfg, int views);
MT_API mt_status mt_run_config_set_sub(mt_run_config* cfg, int sub);
MT_API mt_status mt_run_config_set_resolution(mt_run_config* cfg, int resolution);
MT_API mt_status mt_run_config_save(const mt_run_config* cfg, const char* path);
MT_API void mt_run_config_free(mt_run_config* cfg);
/* Builds the toy model and scene from the config and runs decode, triangulate, fit and eval. */
MT_API mt_status mt_pipeline_run(const mt_run_config* cfg, mt_report** out_report, mt_fit_result** out_fit);

#ifdef __cplusplus
}
#endif

#endif /* MESHTRI_MESHTRI_H */
