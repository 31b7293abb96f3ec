# plotting.py
import matplotlib.pyplot as plt

def plot_trace(rows, x, columns, title, font_size=12, figsize=(6, 3), logy=False, path=None):
    """
    Plot one or more columns of a report against a common x column.

    Parameters:
    rows : list of dict or pandas.DataFrame
        The report rows, e.g. the rows of a Fatou or rd-sum run.
    x : str
        Column used for the horizontal axis.
    columns : list of str
        Columns drawn as lines.
    title : str
        The title of the plot.
    logy : bool, optional
        Logarithmic vertical axis (default is False).
    path : str, optional
        Save the figure there instead of showing it.

    Example:
    rows = [{'n': 1, 'S': 1.0, 'Q': 2.0}, {'n': 2, 'S': 3.0, 'Q': 5.0}]
    plot_trace(rows, 'n', ['S', 'Q'], 'rd-sum')
    """
    if hasattr(rows, 'to_dict'):
        rows = rows.to_dict('records')
    xs = [row[x] for row in rows]

    fig = plt.figure(figsize=figsize)
    for column in columns:
        plt.plot(xs, [row[column] for row in rows], marker='o', label=column)
    if logy:
        plt.yscale('log')
    plt.xlabel(x, fontsize=font_size)
    plt.title(title, fontsize=font_size)
    plt.xticks(fontsize=font_size)
    plt.yticks(fontsize=font_size)
    plt.legend(fontsize=font_size)
    plt.grid(True)

    if path:
        fig.savefig(path)
        plt.close(fig)
    else:
        plt.show()
    return fig
