"""Independent reference implementations the test suite compares against.

These deliberately avoid the library's own code paths: the blob oracle is a
pure-Python flood fill over nested lists, and the press oracle restates the
duty/integrator rules as one flat loop. Expected values in the tests come
from these, never from the implementation under test.
"""

from __future__ import annotations


def flood_fill_blobs(grid) -> list[dict]:
    """4-connected components by brute-force flood fill, largest first.

    Returns dicts with the same fields as the library Blob type. Centroids
    are Python int-sum divisions, bit-comparable with exact float equality.
    """
    rows = len(grid)
    cols = len(grid[0]) if rows else 0
    seen = [[False] * cols for _ in range(rows)]
    found = []
    for r0 in range(rows):
        for c0 in range(cols):
            if not grid[r0][c0] or seen[r0][c0]:
                continue
            stack = [(r0, c0)]
            seen[r0][c0] = True
            pixels = []
            while stack:
                r, c = stack.pop()
                pixels.append((r, c))
                for rr, cc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                    if 0 <= rr < rows and 0 <= cc < cols \
                            and grid[rr][cc] and not seen[rr][cc]:
                        seen[rr][cc] = True
                        stack.append((rr, cc))
            area = len(pixels)
            sum_col = sum(c for _, c in pixels)
            sum_row = sum(r for r, _ in pixels)
            found.append({
                "centroid_x": sum_col / area,
                "centroid_y": sum_row / area,
                "sum_col": sum_col,
                "sum_row": sum_row,
                "min_row": min(r for r, _ in pixels),
                "min_col": min(c for _, c in pixels),
                "max_row": max(r for r, _ in pixels),
                "max_col": max(c for _, c in pixels),
                "area": area,
                "first_flat": r0 * cols + c0,
            })
    found.sort(key=lambda b: (-b["area"], b["first_flat"]))
    return found


def press_pipeline(errors, press_scale: float, limit: int) -> list[int]:
    """Reference duty accumulator + press integrator over an error stream.

    Returns the emitted press per tick (-1, 0, +1), after the integrator's
    reset-and-revert rule.
    """
    duty = 0.0
    count = 0
    direction = 0
    emitted = []
    for e in errors:
        press = 0
        if e != 0.0:
            if duty != 0.0 and (duty > 0) != (e > 0):
                duty = 0.0
            duty += e * press_scale
            if abs(duty) >= 1.0:
                press = 1 if duty > 0 else -1
                duty -= float(press)
                duty = max(-1.0, min(1.0, duty))
        if press == 0:
            count, direction = 0, 0
            emitted.append(0)
            continue
        run = count + 1 if press == direction else 1
        if run >= limit:
            count, direction = 0, 0
            emitted.append(-press)
        else:
            count, direction = run, press
            emitted.append(press)
    return emitted
