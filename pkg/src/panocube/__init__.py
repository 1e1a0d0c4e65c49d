"""360-degree vision geometry toolkit: equirectangular/cubemap projection,
spherical photometric warping, self-supervision losses, direct pose
estimation, evaluation metrics and an analytic ground-truth renderer."""

from .geometry import (Face, FaceGrid, PoseSE3, euler_to_rotation,
                       face_of_direction, face_rotation, make_face_grid)
from .projection import (Cubemap, EquirectImage, bilinear_sample,
                         cubemap_to_equirect, equirect_to_cubemap,
                         ray_to_sphere, sphere_to_pixel)
from .warping import (PointCloud, depth_to_pointcloud, transform_pointcloud,
                      warp_cubemap, warp_equirect, write_ply)
from .losses import (LossWeights, explainability_loss, photometric_loss,
                     pose_consistency_loss, replicate_pose_per_face,
                     smoothness_loss, total_loss, transform_pose_to_front)
from .cube_padding import PaddedFaceGrid, cube_pad
from .metrics import DepthMetrics, RpeMetrics, depth_metrics, rpe
from .pose_estimator import SolverConfig, estimate_pose, pose_jacobian_fd
from .synthetic import (SyntheticScene, Texture, Trajectory, occlusion_mask,
                        random_scene, random_trajectory, render_cubemap,
                        render_equirect, render_sequence)
from .kernels import active_implementation

__version__ = "0.1.0"
