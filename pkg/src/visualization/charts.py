"""
Charts module for creating figures of training runs and learned probes
"""

import logging
import os

import numpy as np
import plotly.express as px
import plotly.graph_objects as go
from plotly.subplots import make_subplots

from src.layer.asplund_layer import soft_mask

logger = logging.getLogger(__name__)


def create_loss_chart(batch_log, loss_name='MSE'):
    """
    Create a line chart of the batch losses of a training run.

    Args:
        batch_log (pd.DataFrame): Columns epoch, batch, loss (as from TrainRun.batch_log)
        loss_name (str): Loss label for the y axis

    Returns:
        plotly.graph_objects.Figure: A plotly figure object
    """
    data = batch_log.reset_index(drop=True).copy()
    data['step'] = np.arange(len(data))

    fig = px.line(
        data,
        x='step',
        y='loss',
        hover_data=['epoch', 'batch'],
        title='Training loss per batch',
        log_y=bool(len(data)) and bool((data['loss'] > 0).all()),
    )

    # epoch boundaries
    starts = data.groupby('epoch')['step'].min()
    for step in starts:
        if step > 0:
            fig.add_vline(x=step, line_dash='dot', line_color='grey', opacity=0.4)

    fig.update_layout(
        xaxis_title='Batch',
        yaxis_title=loss_name,
        template='plotly_white',
    )
    return fig


def create_kernel_heatmaps(W_h, W_m, W_h_ref=None, mask_ref=None):
    """
    Create heatmaps of learned kernels, next to the reference ones if given.

    The soft mask χ(W_m) is shown rather than the raw logits.

    Args:
        W_h (np.ndarray): Learned heights
        W_m (np.ndarray): Learned mask logits
        W_h_ref (np.ndarray, optional): Reference heights
        mask_ref (np.ndarray, optional): Reference support

    Returns:
        plotly.graph_objects.Figure: A plotly figure object
    """
    panels = [('Learned W_h', np.asarray(W_h, dtype=np.float64)), ('Learned χ(W_m)', soft_mask(W_m))]
    if W_h_ref is not None and mask_ref is not None:
        panels = [
            ('Reference W_h', np.asarray(W_h_ref, dtype=np.float64)),
            ('Reference mask', np.asarray(mask_ref, dtype=np.float64)),
        ] + panels

    rows = len(panels) // 2
    fig = make_subplots(rows=rows, cols=2, subplot_titles=[title for title, _ in panels])
    for i, (title, grid) in enumerate(panels):
        is_mask = i % 2 == 1
        fig.add_trace(
            go.Heatmap(
                z=grid[::-1],
                colorscale='Greys' if is_mask else 'Viridis',
                zmin=0.0 if is_mask else None,
                zmax=1.0 if is_mask else None,
                showscale=False,
                name=title,
            ),
            row=i // 2 + 1,
            col=i % 2 + 1,
        )

    fig.update_layout(
        title='Height and mask kernels',
        template='plotly_white',
        height=350 * rows,
    )
    return fig


def create_probe_recovery_chart(table):
    """
    Create a grouped bar chart of probe-recovery errors per reference probe.

    Args:
        table (pd.DataFrame): Columns beta, c, e_pr, mask_mse

    Returns:
        plotly.graph_objects.Figure: A plotly figure object
    """
    data = table.copy()
    data['probe'] = [f'β={beta:g}, c={c:g}' for beta, c in zip(data['beta'], data['c'])]
    long = data.melt(id_vars=['probe'], value_vars=['e_pr', 'mask_mse'], var_name='error', value_name='value')

    fig = px.bar(
        long,
        x='probe',
        y='value',
        color='error',
        barmode='group',
        log_y=bool((long['value'] > 0).all()),
        title='Probe recovery errors',
    )
    fig.update_layout(
        xaxis_title='Reference probe',
        yaxis_title='Error',
        template='plotly_white',
        legend_title='Error',
    )
    return fig


def save_figure(fig, path):
    """Write a figure as a standalone HTML file."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    fig.write_html(path, include_plotlyjs='cdn')
    logger.info('wrote figure %s', path)
    return path
