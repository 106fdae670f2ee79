/* densesr: single-image super-resolution for grayscale imagery.
 *
 * C API over the C++ core. All objects are opaque handles created and
 * destroyed through these functions; every fallible call returns a
 * dsr_status and leaves a human-readable message in dsr_last_error()
 * (thread-local) on failure. Out-parameters are untouched on failure.
 */
#ifndef DENSESR_H
#define DENSESR_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dsr_status {
  DSR_OK = 0,
  DSR_ERR_CONFIG = 1,         /* invalid configuration or argument */
  DSR_ERR_SHAPE = 2,          /* tensor/image dimension mismatch */
  DSR_ERR_CONTRACT = 3,       /* API precondition violated */
  DSR_ERR_IO = 4,             /* filesystem failure */
  DSR_ERR_PGM_HEADER = 5,     /* malformed PGM header */
  DSR_ERR_PGM_SIZE = 6,       /* PGM pixel data truncated or oversized */
  DSR_ERR_PGM_MAXVAL = 7,     /* PGM maxval other than 255/65535 */
  DSR_ERR_CKPT_MAGIC = 8,     /* checkpoint magic bytes wrong */
  DSR_ERR_CKPT_VERSION = 9,   /* checkpoint version unsupported */
  DSR_ERR_CKPT_TRUNCATED = 10,/* checkpoint ends mid-record */
  DSR_ERR_CKPT_SHAPE = 11,    /* checkpoint tensors disagree with config */
  DSR_ERR_MODEL = 12,         /* model/scale mismatch */
  DSR_ERR_VERIFY = 13,        /* gradient verification failed */
  DSR_ERR_INTERNAL = 14
} dsr_status;

const char* dsr_version(void);
const char* dsr_status_name(dsr_status status);
/* Message from the last failing call on this thread; empty string if none. */
const char* dsr_last_error(void);

/* ---- images ------------------------------------------------------- */

typedef struct dsr_image dsr_image;

/* Pixels are row-major doubles in [0,1]; bit_depth is 8 or 16 and controls
 * PGM quantization on save. */
dsr_status dsr_image_create(int64_t width, int64_t height, const double* pixels, int bit_depth,
                            dsr_image** out);
dsr_status dsr_image_load_pgm(const char* path, dsr_image** out);
dsr_status dsr_image_save_pgm(const dsr_image* img, const char* path);
int64_t dsr_image_width(const dsr_image* img);
int64_t dsr_image_height(const dsr_image* img);
int dsr_image_bit_depth(const dsr_image* img);
const double* dsr_image_pixels(const dsr_image* img);
void dsr_image_destroy(dsr_image* img);

typedef enum dsr_resample_kind {
  DSR_RESAMPLE_NEAREST = 0,
  DSR_RESAMPLE_BILINEAR = 1,
  DSR_RESAMPLE_BICUBIC = 2
} dsr_resample_kind;

/* Pixel-center aligned separable resize; antialias widens the kernel when
 * downsampling. Bicubic uses a = -0.5. */
dsr_status dsr_image_resample(const dsr_image* src, int64_t out_w, int64_t out_h,
                              dsr_resample_kind kind, int antialias, dsr_image** out);

/* Share of HR pixels surviving a 1/scale downsample: 1/scale^2. */
double dsr_retained_fraction(int scale);

/* ---- metrics ------------------------------------------------------ */

/* PSNR in dB over unit dynamic range; +infinity for identical images. */
dsr_status dsr_psnr(const dsr_image* a, const dsr_image* b, double* out);
/* Mean SSIM, 11x11 Gaussian window (sigma 1.5), interior positions only. */
dsr_status dsr_ssim(const dsr_image* a, const dsr_image* b, double* out);

/* ---- model -------------------------------------------------------- */

typedef struct dsr_model dsr_model;

typedef struct dsr_model_config {
  uint32_t scale;            /* 2, 4 or 8 */
  uint32_t num_blocks;       /* dense blocks in the trunk */
  uint32_t layers_per_block; /* m */
  uint32_t growth;           /* k; trunk width is m*k */
  uint32_t feat0;            /* first feature-extractor width */
  uint32_t feat1;            /* second width; must equal m*k */
} dsr_model_config;

/* Reference configuration: 12 blocks, m=8, k=16, features 64/128. */
void dsr_model_config_paper(uint32_t scale, dsr_model_config* out);
/* Desk-scale configuration: 3 blocks, m=4, k=8, features 16/32. */
void dsr_model_config_small(uint32_t scale, dsr_model_config* out);

dsr_status dsr_model_create(const dsr_model_config* config, uint64_t seed, dsr_model** out);
dsr_status dsr_model_load(const char* path, dsr_model** out);
dsr_status dsr_model_save(const dsr_model* model, const char* path);
uint32_t dsr_model_scale(const dsr_model* model);
uint64_t dsr_model_param_count(const dsr_model* model);
/* Super-resolve: output is scale x the input in both dimensions. */
dsr_status dsr_model_forward(const dsr_model* model, const dsr_image* lr, dsr_image** sr);
void dsr_model_destroy(dsr_model* model);

/* ---- dataset preparation ------------------------------------------ */

typedef void (*dsr_diag_cb)(void* user, const char* item, const char* message);

/* Partitions every PGM under hr_dir into patch x patch tiles, synthesizes
 * bicubic LR counterparts and writes a cache (manifest + patch PGMs) under
 * out_dir. */
dsr_status dsr_prepare_dataset(const char* hr_dir, const char* out_dir, uint32_t scale,
                               uint32_t patch, dsr_diag_cb diag, void* user, uint64_t* pair_count);

/* ---- training ------------------------------------------------------ */

typedef struct dsr_train_config {
  const char* cache_dir; /* from dsr_prepare_dataset */
  const char* out_dir;   /* checkpoints + logs; may be NULL */
  dsr_model_config model;
  uint64_t seed;
  uint32_t epochs;
  uint32_t batch_size;
  double lr;
  const uint32_t* lr_drop_epochs; /* learning rate divided by lr_gamma at these epochs */
  size_t num_lr_drops;
  double lr_gamma;
  double adam_beta1, adam_beta2, adam_epsilon;
  double val_fraction;      /* pairs held out for validation loss */
  uint32_t checkpoint_every;/* epochs between checkpoints; 0 = final only */
  int augment;              /* random horizontal/vertical flips */
  int deterministic;        /* force single-threaded, bitwise-reproducible */
  uint32_t threads;
} dsr_train_config;

/* val_loss is NaN when no validation split was requested. */
typedef void (*dsr_epoch_cb)(void* user, uint32_t epoch, double mean_loss, double val_loss,
                             double lr);

dsr_status dsr_train(const dsr_train_config* config, dsr_epoch_cb on_epoch, void* user,
                     double* final_mean_loss);

/* ---- evaluation ----------------------------------------------------- */

typedef struct dsr_eval_config {
  const char* hr_dir;
  const char* model_path;     /* NULL to evaluate a baseline instead */
  dsr_resample_kind baseline; /* used when model_path is NULL */
  uint32_t scale;
  uint32_t eval_patch;        /* 0 = whole images, else evaluate on tiles */
  uint32_t threads;
  const char* rows_csv;       /* per-image scores */
  const char* agg_csv;        /* per-method/per-scale means */
} dsr_eval_config;

dsr_status dsr_evaluate(const dsr_eval_config* config, dsr_diag_cb diag, void* user,
                        uint64_t* rows_written);

/* ---- reporting ------------------------------------------------------ */

/* Reads >= 1 aggregate CSVs and writes the cross-method delta table. Every
 * method must cover the same scale set. */
dsr_status dsr_report(const char* const* agg_csv_paths, size_t num_paths, const char* delta_csv);

/* ---- gradient verification ------------------------------------------ */

typedef void (*dsr_gradcheck_cb)(void* user, const char* op, double max_rel_err, int pass);

/* Double-precision central-difference check of every differentiable op and
 * a tiny end-to-end network. Returns DSR_ERR_VERIFY if any op fails the
 * 1e-5 relative tolerance. */
dsr_status dsr_gradcheck(dsr_gradcheck_cb on_op, void* user);

#ifdef __cplusplus
}
#endif

#endif /* DENSESR_H */
